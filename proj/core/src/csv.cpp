#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rwpi/core.hpp"

namespace rwpi {

namespace {

// Splits one logical record starting at `pos`. Quoted fields may span
// physical lines; `line` is advanced for each newline consumed.
bool next_record(const std::string& text, std::size_t& pos, std::size_t& line,
                 std::vector<std::string>& fields, const std::string& origin) {
  fields.clear();
  if (pos >= text.size()) return false;
  std::string field;
  bool quoted = false;
  const std::size_t start_line = line;
  while (pos < text.size()) {
    const char c = text[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
          continue;
        }
        quoted = false;
        ++pos;
        continue;
      }
      if (c == '\n') ++line;
      field.push_back(c);
      ++pos;
      continue;
    }
    if (c == '"') {
      if (!field.empty()) {
        throw Error(ErrorCode::parse, origin + ":" + std::to_string(line) +
                                          ": quote inside unquoted field");
      }
      quoted = true;
      ++pos;
      continue;
    }
    if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      ++pos;
      continue;
    }
    if (c == '\r' || c == '\n') {
      if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
      ++pos;
      ++line;
      fields.push_back(std::move(field));
      return true;
    }
    field.push_back(c);
    ++pos;
  }
  if (quoted) {
    throw Error(ErrorCode::parse,
                origin + ":" + std::to_string(start_line) + ": unterminated quoted field");
  }
  fields.push_back(std::move(field));
  ++line;
  return true;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

CsvTable parse_csv_table(const std::string& text_in, const std::string& origin) {
  std::string text = text_in;
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF) {
    text.erase(0, 3);
  }
  std::size_t pos = 0;
  std::size_t line = 1;
  std::vector<std::string> fields;
  CsvTable table;
  if (!next_record(text, pos, line, fields, origin)) {
    throw Error(ErrorCode::parse, origin + ": empty file (missing header)");
  }
  for (auto& f : fields) table.header.push_back(trim(f));
  const std::size_t width = table.header.size();

  std::vector<std::vector<double>> rows;
  while (true) {
    const std::size_t record_line = line;
    if (!next_record(text, pos, line, fields, origin)) break;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
    if (fields.size() != width) {
      throw Error(ErrorCode::parse, origin + ":" + std::to_string(record_line) + ": expected " +
                                        std::to_string(width) + " fields, found " +
                                        std::to_string(fields.size()));
    }
    std::vector<double> row(width);
    for (std::size_t j = 0; j < width; ++j) {
      const std::string cell = trim(fields[j]);
      std::size_t used = 0;
      double v = 0.0;
      bool ok = !cell.empty();
      if (ok) {
        try {
          v = std::stod(cell, &used);
        } catch (const std::exception&) {
          ok = false;
        }
      }
      if (!ok || used != cell.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::parse, origin + ":" + std::to_string(record_line) +
                                          ": column '" + table.header[j] +
                                          "' is not a finite number: '" + cell + "'");
      }
      row[j] = v;
    }
    rows.push_back(std::move(row));
  }
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return table;
}

CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv_table(buf.str(), path);
}

Dataset read_dataset_csv(const std::string& path, const std::string& response_column,
                         TaskKind kind) {
  const CsvTable table = read_csv_table(path);
  const auto it = std::find(table.header.begin(), table.header.end(), response_column);
  if (it == table.header.end()) {
    throw Error(ErrorCode::parse, path + ": no column named '" + response_column + "'");
  }
  const auto ycol = static_cast<Eigen::Index>(it - table.header.begin());
  const Eigen::Index width = table.values.cols();
  Matrix x(table.values.rows(), width - 1);
  std::vector<std::string> names;
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < width; ++j) {
    if (j == ycol) continue;
    x.col(k++) = table.values.col(j);
    names.push_back(table.header[static_cast<std::size_t>(j)]);
  }
  return Dataset(std::move(x), table.values.col(ycol), kind, false, std::move(names));
}

void write_dataset_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path + "'");
  for (Eigen::Index j = 0; j < ds.d(); ++j) {
    out << (ds.column_names().empty() ? "x" + std::to_string(j + 1)
                                      : ds.column_names()[static_cast<std::size_t>(j)])
        << ',';
  }
  out << "y\n";
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    for (Eigen::Index j = 0; j < ds.d(); ++j) out << format_number(ds.x()(i, j)) << ',';
    out << format_number(ds.y()[i]) << '\n';
  }
  if (!out) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

}  // namespace rwpi
