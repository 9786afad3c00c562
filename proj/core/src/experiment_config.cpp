#include <charconv>
#include <fstream>
#include <sstream>

#include "rwpi/pipeline.hpp"

namespace rwpi::pipeline {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Reader {
  std::string where;

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw Error(ErrorCode::config, where + ": key '" + key + "': " + what);
  }

  std::size_t count(const std::string& key, const std::string& v) const {
    std::size_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) fail(key, "expected a non-negative integer, got '" + v + "'");
    return out;
  }

  double real(const std::string& key, const std::string& v) const {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
      fail(key, "expected a number, got '" + v + "'");
    }
    return out;
  }

  bool flag(const std::string& key, const std::string& v) const {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key, "expected true or false, got '" + v + "'");
  }
};

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const Reader r{origin + ":" + std::to_string(lineno)};
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::config, r.where + ": expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "n") cfg.n = r.count(key, value);
      else if (key == "d") cfg.d = r.count(key, value);
      else if (key == "sigma") cfg.sigma = r.real(key, value);
      else if (key == "alpha") cfg.alpha = r.real(key, value);
      else if (key == "reps") cfg.reps = r.count(key, value);
      else if (key == "test_size") cfg.test_size = r.count(key, value);
      else if (key == "seed") cfg.seed = RngSeed{r.count(key, value)};
      else if (key == "method") cfg.method = parse_selection_method(value);
      else if (key == "q") cfg.q = Exponent::parse(value);
      else if (key == "mc_draws") cfg.mc_draws = r.count(key, value);
      else if (key == "saa_size") cfg.saa_size = static_cast<Eigen::Index>(r.count(key, value));
      else if (key == "smoothing_floor") cfg.smoothing_floor = r.real(key, value);
      else if (key == "scale_response") cfg.scale_response = r.flag(key, value);
      else if (key == "cv_folds") cfg.cv_folds = r.count(key, value);
      else if (key == "cv_grid") cfg.cv_grid = r.count(key, value);
      else if (key == "threads") cfg.threads = static_cast<int>(r.count(key, value));
      else if (key == "data") cfg.data = value;
      else if (key == "response") cfg.response = value;
      else if (key == "train_size") cfg.train_size = r.count(key, value);
      else if (key == "methods") {
        cfg.methods.clear();
        std::istringstream items(value);
        std::string item;
        while (std::getline(items, item, ',')) {
          item = trim(item);
          if (!item.empty()) cfg.methods.push_back(parse_experiment_method(item));
        }
      } else {
        throw Error(ErrorCode::config, r.where + ": unknown key '" + key + "'");
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::config && std::string(e.what()).starts_with(origin)) throw;
      r.fail(key, e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment_config(text.str(), path);
}

}  // namespace rwpi::pipeline
