#include "emit.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

namespace rwpi::cli {

Json num(double v) {
  if (!std::isfinite(v)) {
    if (std::isnan(v)) return nullptr;
    return v > 0 ? "inf" : "-inf";
  }
  return std::stod(format_number(v));
}

Json vec(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v[i]));
  return out;
}

Json to_json(const pipeline::RegularizationChoice& c) {
  Json j;
  j["alpha"] = num(c.alpha);
  j["method"] = pipeline::to_string(c.method);
  j["mc_draws"] = c.mc_draws;
  j["eta_hat"] = num(c.eta_hat);
  j["delta"] = num(c.delta);
  j["lambda"] = num(c.lambda);
  j["seed"] = c.seed.master;
  return j;
}

Json to_json(const solvers::FitResult& f, const std::string& model, const std::string& penalty) {
  Json j;
  j["model"] = model;
  j["penalty"] = penalty;
  j["lambda"] = num(f.lambda);
  j["objective"] = num(f.objective);
  j["kkt_residual"] = num(f.kkt_residual);
  j["iterations"] = f.iterations;
  j["converged"] = f.converged;
  if (f.separable) j["separable"] = true;
  j["beta"] = vec(f.beta);
  return j;
}

Json to_json(const dro::WorstCase& w) {
  Json j;
  j["value"] = num(w.value);
  j["form"] = dro::to_string(w.form);
  if (w.gamma) j["gamma"] = num(*w.gamma);
  return j;
}

Json to_json(const profile::RwpValue& r) {
  Json j;
  j["value"] = num(r.value);
  j["method"] = profile::to_string(r.method);
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["residual"] = num(r.residual);
  j["dual_point"] = vec(r.dual_point);
  if (r.hit_dual_boundary) j["hit_dual_boundary"] = true;
  return j;
}

Json to_json(const limits::QuantileEstimate& q) {
  Json j;
  j["level"] = num(q.level);
  j["value"] = num(q.value);
  j["sample_size"] = q.sample_size;
  j["standard_error"] = num(q.standard_error);
  return j;
}

Json to_json(const pipeline::ExperimentAggregate& a) {
  Json j;
  j["method"] = pipeline::to_string(a.method);
  j["n"] = a.n;
  j["d"] = a.d;
  j["train_mean"] = num(a.train_mean);
  j["train_sd"] = num(a.train_sd);
  j["test_mean"] = num(a.test_mean);
  j["test_sd"] = num(a.test_sd);
  j["l1_mean"] = a.l1_mean ? num(*a.l1_mean) : Json(nullptr);
  j["l2_mean"] = a.l2_mean ? num(*a.l2_mean) : Json(nullptr);
  j["coverage"] = a.coverage ? num(*a.coverage) : Json(nullptr);
  return j;
}

void emit_json(const Json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed for " + path);
}

}  // namespace rwpi::cli
