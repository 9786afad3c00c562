#include "inputs.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rwpi::cli {

namespace {

std::vector<double> parse_numbers(const std::string& text, const std::string& origin) {
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
      throw Error(ErrorCode::parse, origin + ": not a number: '" + token + "'");
    }
    out.push_back(v);
    token.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Vector read_beta_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.contains("beta") || !j["beta"].is_array()) {
      throw Error(ErrorCode::parse, path + ": expected a JSON object with a \"beta\" array");
    }
    std::vector<double> v;
    for (const auto& x : j["beta"]) {
      if (!x.is_number()) throw Error(ErrorCode::parse, path + ": non-numeric entry in \"beta\"");
      v.push_back(x.get<double>());
    }
    return to_vector(v);
  }
  const auto v = parse_numbers(text, path);
  if (v.empty()) throw Error(ErrorCode::empty_input, path + ": no coefficients");
  return to_vector(v);
}

Vector parse_vector(const std::string& text, const std::string& flag) {
  const auto v = parse_numbers(text, flag);
  if (v.empty()) throw Error(ErrorCode::empty_input, flag + ": empty list");
  return to_vector(v);
}

Vector read_column(const std::string& path, const std::string& name) {
  const auto table = read_csv_table(path);
  if (name.empty()) {
    if (table.header.size() != 1) {
      throw Error(ErrorCode::config, path + " has several columns; choose one with --column");
    }
    return table.values.col(0);
  }
  const auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end()) throw Error(ErrorCode::config, path + " has no column '" + name + "'");
  return table.values.col(it - table.header.begin());
}

}  // namespace rwpi::cli
