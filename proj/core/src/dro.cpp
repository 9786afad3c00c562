#include "rwpi/dro.hpp"

#include <cmath>
#include <limits>

namespace rwpi::dro {

std::string to_string(WorstCaseForm form) {
  switch (form) {
    case WorstCaseForm::closed_linear: return "closed-linear";
    case WorstCaseForm::closed_linear_barbeta: return "closed-linear-barbeta";
    case WorstCaseForm::closed_logistic: return "closed-logistic";
    case WorstCaseForm::closed_hinge: return "closed-hinge";
    case WorstCaseForm::dual_numeric: return "dual-numeric";
  }
  return "unknown";
}

namespace {

void require(const Dataset& ds, const Vector& beta, TaskKind kind, double delta) {
  if (ds.kind() != kind) {
    throw Error(ErrorCode::kind_mismatch,
                "loss requires a " + to_string(kind) + " dataset, got " + to_string(ds.kind()));
  }
  if (beta.size() != ds.d()) throw Error(ErrorCode::dimension, "beta length does not match d");
  if (ds.n() == 0) throw Error(ErrorCode::empty_input, "empty dataset");
  if (!(delta >= 0.0)) throw Error(ErrorCode::invalid_argument, "radius delta must be >= 0");
}

double penalty_norm(const Vector& beta, Exponent p, bool use_barbeta) {
  if (!use_barbeta) return lp_norm(beta, p);
  Vector bar(beta.size() + 1);
  bar.head(beta.size()) = -beta;
  bar[beta.size()] = 1.0;
  return lp_norm(bar, p);
}

double log1p_exp(double t) {
  // log(1 + e^t) without overflow
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

}  // namespace

double mean_squared_error(const Dataset& ds, const Vector& beta) {
  return (ds.y() - ds.x() * beta).squaredNorm() / static_cast<double>(ds.n());
}

double logistic_loss(const Dataset& ds, const Vector& beta) {
  const Vector margin = ds.y().cwiseProduct(ds.x() * beta);
  double total = 0.0;
  for (Eigen::Index i = 0; i < margin.size(); ++i) total += log1p_exp(-margin[i]);
  return total / static_cast<double>(ds.n());
}

double hinge_loss(const Dataset& ds, const Vector& beta) {
  const Vector margin = ds.y().cwiseProduct(ds.x() * beta);
  return (1.0 - margin.array()).max(0.0).sum() / static_cast<double>(ds.n());
}

WorstCase worstcase_linear_closed(const Dataset& ds, const Vector& beta, double delta, Exponent p,
                                  bool use_barbeta) {
  require(ds, beta, TaskKind::regression, delta);
  const double root = std::sqrt(mean_squared_error(ds, beta)) +
                      std::sqrt(delta) * penalty_norm(beta, p, use_barbeta);
  return {root * root, std::nullopt,
          use_barbeta ? WorstCaseForm::closed_linear_barbeta : WorstCaseForm::closed_linear};
}

WorstCase worstcase_logistic_closed(const Dataset& ds, const Vector& beta, double delta, Exponent p) {
  require(ds, beta, TaskKind::binary, delta);
  return {logistic_loss(ds, beta) + delta * lp_norm(beta, p), std::nullopt,
          WorstCaseForm::closed_logistic};
}

WorstCase worstcase_hinge_closed(const Dataset& ds, const Vector& beta, double delta, Exponent p) {
  require(ds, beta, TaskKind::binary, delta);
  return {hinge_loss(ds, beta) + delta * lp_norm(beta, p), std::nullopt,
          WorstCaseForm::closed_hinge};
}

double linear_dual_objective(double gamma, double delta, double v_norm_sq, double mse) {
  if (!(gamma > v_norm_sq)) return std::numeric_limits<double>::infinity();
  return gamma * delta + gamma / (gamma - v_norm_sq) * mse;
}

WorstCase worstcase_dual_numeric(const Dataset& ds, const Vector& beta, double delta, Exponent p,
                                 bool use_barbeta) {
  require(ds, beta, TaskKind::regression, delta);
  const double mse = mean_squared_error(ds, beta);
  const double a = std::pow(penalty_norm(beta, p, use_barbeta), 2);
  WorstCase out;
  out.form = WorstCaseForm::dual_numeric;
  if (delta == 0.0) {
    // degenerate dual: the ball is {P_n}
    out.value = mse;
    out.gamma = a;
    return out;
  }
  if (a == 0.0) {
    // g(gamma) = gamma delta + MSE decreases to MSE as gamma -> 0+
    out.value = mse;
    out.gamma = 0.0;
    return out;
  }
  auto g = [&](double gamma) { return linear_dual_objective(gamma, delta, a, mse); };

  double lo = a * (1.0 + 1e-9);
  double hi = a * (1.0 + std::sqrt(mse / delta)) * 10.0;
  // g is convex on (a, inf); widen until it is increasing at the right end
  int widen = 0;
  while (g(hi * (1.0 + 1e-6)) < g(hi)) {
    if (++widen > 200 || !std::isfinite(hi)) {
      throw Error(ErrorCode::numeric_bracket, "could not bracket the dual minimizer");
    }
    hi *= 10.0;
  }
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = g(x1);
  double f2 = g(x2);
  for (int it = 0; it < 500 && (hi - lo) > 1e-10 * std::max(lo, 1e-300); ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = g(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = g(x2);
    }
  }
  // the left bracket end is a candidate when the minimizer sits at the boundary
  double best_x = f1 <= f2 ? x1 : x2;
  double best_f = std::min(f1, f2);
  const double left = a * (1.0 + 1e-9);
  if (g(left) < best_f) {
    best_x = left;
    best_f = g(left);
  }
  out.value = best_f;
  out.gamma = best_x;
  return out;
}

}  // namespace rwpi::dro
