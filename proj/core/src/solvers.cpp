#include "rwpi/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "rwpi/dro.hpp"
#include "rwpi/parallel.hpp"

namespace rwpi::solvers {

PenaltyNorm parse_penalty_norm(const std::string& text) {
  if (text == "1" || text == "l1") return PenaltyNorm::l1;
  if (text == "2" || text == "l2") return PenaltyNorm::l2;
  throw Error(ErrorCode::invalid_penalty, "penalty norm must be 1 or 2, got '" + text + "'");
}

Exponent to_exponent(PenaltyNorm p) {
  return Exponent::finite(p == PenaltyNorm::l1 ? 1.0 : 2.0);
}

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double penalty(const Vector& beta, PenaltyNorm p) {
  return p == PenaltyNorm::l1 ? beta.lpNorm<1>() : beta.norm();
}

// Distance of -grad from lambda * subdifferential of ||.||_p at beta.
double subgradient_violation(const Vector& grad, const Vector& beta, double lambda, PenaltyNorm p) {
  if (p == PenaltyNorm::l1) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
      const double v = beta[j] != 0.0 ? std::abs(grad[j] + lambda * (beta[j] > 0 ? 1.0 : -1.0))
                                      : std::max(0.0, std::abs(grad[j]) - lambda);
      worst = std::max(worst, v);
    }
    return worst;
  }
  const double bn = beta.norm();
  if (bn > 0.0) return (grad + lambda * beta / bn).cwiseAbs().maxCoeff();
  return std::max(0.0, grad.norm() - lambda);
}

// Group shrinkage: prox of t ||.||_2.
Vector group_shrink(const Vector& v, double t) {
  const double n = v.norm();
  if (n <= t) return Vector::Zero(v.size());
  return (1.0 - t / n) * v;
}

void require(const Dataset& ds, TaskKind kind, double lambda) {
  if (ds.kind() != kind) {
    throw Error(ErrorCode::kind_mismatch, "fit requires a " + to_string(kind) + " dataset");
  }
  if (ds.n() == 0) throw Error(ErrorCode::empty_input, "empty dataset");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::invalid_penalty, "penalty weight lambda must be finite and >= 0");
  }
}

constexpr double kInterpolationMse = 1e-14;

Vector warm_start(const FitOptions& opts, Eigen::Index d) {
  if (opts.initial.size() == 0) return Vector::Zero(d);
  if (opts.initial.size() != d) throw Error(ErrorCode::dimension, "warm start has the wrong length");
  return opts.initial;
}

}  // namespace

// Sqrt-LASSO ------------------------------------------------------------------

double sqrt_lasso_objective(const Dataset& ds, const Vector& beta, double lambda, PenaltyNorm p) {
  return std::sqrt(dro::mean_squared_error(ds, beta)) + lambda * penalty(beta, p);
}

double sqrt_lasso_kkt(const Dataset& ds, const Vector& beta, double lambda, PenaltyNorm p) {
  const Vector resid = ds.y() - ds.x() * beta;
  const double n = static_cast<double>(ds.n());
  const double mse = resid.squaredNorm() / n;
  if (mse < kInterpolationMse) return 0.0;
  const Vector grad = -(ds.x().transpose() * resid) / (n * std::sqrt(mse));
  return subgradient_violation(grad, beta, lambda, p);
}

double sqrt_lasso_zero_threshold(const Dataset& ds, PenaltyNorm p) {
  const double yn = ds.y().norm();
  if (yn == 0.0) return 0.0;
  const Vector xty = ds.x().transpose() * ds.y();
  const double dual = p == PenaltyNorm::l1 ? xty.cwiseAbs().maxCoeff() : xty.norm();
  return dual / (std::sqrt(static_cast<double>(ds.n())) * yn);
}

namespace {

// Minimizes 0.5 beta^T G beta - b^T beta + tau ||beta||_1 by cyclic
// coordinate descent on the Gram matrix, warm-started at beta. b enters
// only through grad_part.
int lasso_cd(const Matrix& gram, double tau, Vector& beta, Vector& grad_part,
             double tol, int max_passes) {
  // grad_part = b - G beta is maintained incrementally
  const auto d = beta.size();
  int passes = 0;
  while (passes < max_passes) {
    ++passes;
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double gjj = gram(j, j);
      if (gjj <= 0.0) continue;
      const double old = beta[j];
      const double z = grad_part[j] + gjj * old;
      const double updated = soft_threshold(z, tau) / gjj;
      const double delta = updated - old;
      if (delta != 0.0) {
        beta[j] = updated;
        grad_part.noalias() -= gram.col(j) * delta;
        max_change = std::max(max_change, std::abs(delta) * std::sqrt(gjj));
      }
    }
    if (max_change <= tol) break;
  }
  return passes;
}

// Minimizes 0.5 beta^T G beta - b^T beta + tau ||beta||_2 by accelerated
// proximal gradient with restart.
int group_prox(const Matrix& gram, const Vector& b, double tau, double lipschitz, Vector& beta,
               double tol, int max_steps) {
  const double step = 1.0 / lipschitz;
  Vector prev = beta;
  Vector y = beta;
  double t = 1.0;
  int steps = 0;
  while (steps < max_steps) {
    ++steps;
    const Vector grad = gram * y - b;
    Vector next = group_shrink(y - step * grad, step * tau);
    // gradient restart: drop momentum when it points uphill
    if ((y - next).dot(next - beta) > 0.0) {
      y = beta;
      t = 1.0;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    prev = beta;
    beta = next;
    y = beta + ((t - 1.0) / t_next) * (beta - prev);
    t = t_next;
    if ((beta - prev).norm() * std::sqrt(lipschitz) <= tol) break;
  }
  return steps;
}

}  // namespace

FitResult fit_sqrt_lasso(const Dataset& ds, double lambda, PenaltyNorm p, FitOptions opts) {
  require(ds, TaskKind::regression, lambda);
  const auto n = static_cast<double>(ds.n());
  const auto d = ds.d();
  const Matrix gram = ds.x().transpose() * ds.x() / n;
  const Vector xty = ds.x().transpose() * ds.y() / n;
  double lipschitz = 1.0;
  if (p == PenaltyNorm::l2) {
    lipschitz = std::max(1e-300, Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly)
                                     .eigenvalues()
                                     .maxCoeff());
  }

  FitResult fit;
  fit.lambda = lambda;
  fit.beta = warm_start(opts, d);
  Vector grad_part = xty - gram * fit.beta;
  double objective = sqrt_lasso_objective(ds, fit.beta, lambda, p);
  if (opts.record_trace) fit.objective_trace.push_back(objective);
  // inner solves stop well below the outer tolerance
  const double inner_tol = std::max(1e-15, 1e-3 * opts.tol);
  int passes_left = opts.max_passes;

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    fit.iterations = outer + 1;
    const double mse = dro::mean_squared_error(ds, fit.beta);
    if (mse < kInterpolationMse) {
      fit.converged = true;
      break;
    }
    const double tau = lambda * std::sqrt(mse);
    int used = 0;
    if (p == PenaltyNorm::l1) {
      used = lasso_cd(gram, tau, fit.beta, grad_part, inner_tol, std::max(1, passes_left));
    } else {
      used = group_prox(gram, xty, tau, lipschitz, fit.beta, inner_tol, std::max(1, passes_left));
    }
    passes_left -= used;

    const double next = sqrt_lasso_objective(ds, fit.beta, lambda, p);
    const double decrease = objective - next;
    // CD is a descent step for the joint (beta, sigma) objective, so any
    // rise here is rounding
    objective = std::min(objective, next);
    if (opts.record_trace) fit.objective_trace.push_back(objective);
    fit.kkt_residual = sqrt_lasso_kkt(ds, fit.beta, lambda, p);
    if (decrease < opts.tol && fit.kkt_residual < opts.tol) {
      fit.converged = true;
      break;
    }
    if (passes_left <= 0) break;
  }
  if (dro::mean_squared_error(ds, fit.beta) < kInterpolationMse) fit.converged = true;
  fit.objective = sqrt_lasso_objective(ds, fit.beta, lambda, p);
  fit.kkt_residual = sqrt_lasso_kkt(ds, fit.beta, lambda, p);
  return fit;
}

// Logistic --------------------------------------------------------------------

namespace {

double logistic_loss_grad(const Dataset& ds, const Vector& beta, Vector* grad) {
  const Vector margin = ds.y().cwiseProduct(ds.x() * beta);
  const double n = static_cast<double>(ds.n());
  double loss = 0.0;
  Vector weight(margin.size());
  for (Eigen::Index i = 0; i < margin.size(); ++i) {
    const double m = margin[i];
    loss += m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    // sigma(-m) = 1 / (1 + e^m)
    weight[i] = m > 0 ? std::exp(-m) / (1.0 + std::exp(-m)) : 1.0 / (1.0 + std::exp(m));
  }
  if (grad != nullptr) *grad = -(ds.x().transpose() * weight.cwiseProduct(ds.y())) / n;
  return loss / n;
}

Vector prox(const Vector& v, double t, PenaltyNorm p) {
  if (p == PenaltyNorm::l2) return group_shrink(v, t);
  Vector out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) out[j] = soft_threshold(v[j], t);
  return out;
}

}  // namespace

double logistic_objective(const Dataset& ds, const Vector& beta, double lambda, PenaltyNorm p) {
  return logistic_loss_grad(ds, beta, nullptr) + lambda * penalty(beta, p);
}

double logistic_kkt(const Dataset& ds, const Vector& beta, double lambda, PenaltyNorm p) {
  Vector grad;
  logistic_loss_grad(ds, beta, &grad);
  return subgradient_violation(grad, beta, lambda, p);
}

double logistic_zero_threshold(const Dataset& ds, PenaltyNorm p) {
  const Vector g = ds.x().transpose() * ds.y() / (2.0 * static_cast<double>(ds.n()));
  return p == PenaltyNorm::l1 ? g.cwiseAbs().maxCoeff() : g.norm();
}

FitResult fit_logistic_lp(const Dataset& ds, double lambda, PenaltyNorm p, FitOptions opts) {
  require(ds, TaskKind::binary, lambda);
  const auto d = ds.d();
  FitResult fit;
  fit.lambda = lambda;
  fit.beta = warm_start(opts, d);

  auto full = [&](const Vector& b) { return logistic_objective(ds, b, lambda, p); };
  auto separates = [&](const Vector& b) { return ds.y().cwiseProduct(ds.x() * b).minCoeff() > 0.0; };
  // the logistic loss has curvature at most ||X||^2 / (4n)
  double lip = std::max(1e-12, ds.x().squaredNorm() / (4.0 * static_cast<double>(ds.n())) * 1e-2);

  Vector x = fit.beta;
  Vector x_prev = x;
  Vector y = x;
  double t = 1.0;
  double f_x = full(x);
  if (opts.record_trace) fit.objective_trace.push_back(f_x);

  for (int it = 0; it < opts.max_outer; ++it) {
    fit.iterations = it + 1;
    Vector grad;
    const double f_y = logistic_loss_grad(ds, y, &grad);
    Vector z;
    for (int bt = 0; bt < 100; ++bt) {
      z = prox(y - grad / lip, lambda / lip, p);
      const Vector diff = z - y;
      const double f_z = logistic_loss_grad(ds, z, nullptr);
      if (f_z <= f_y + grad.dot(diff) + 0.5 * lip * diff.squaredNorm() + 1e-15 * std::abs(f_y)) break;
      lip *= 2.0;
    }
    const double f_z = full(z);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    x_prev = x;
    if (f_z <= f_x) {
      x = z;
      f_x = f_z;
      y = x + ((t - 1.0) / t_next) * (x - x_prev);
      t = t_next;
    } else {
      // monotone variant: keep x, restart momentum from it
      y = x;
      t = 1.0;
    }
    if (opts.record_trace) fit.objective_trace.push_back(f_x);
    fit.kkt_residual = logistic_kkt(ds, x, lambda, p);
    // without a penalty a separating x has no finite minimizer, however
    // small its gradient gets
    if (fit.kkt_residual <= opts.tol && !(lambda == 0.0 && separates(x))) {
      fit.converged = true;
      break;
    }
    lip *= 0.9;  // let the step grow back after conservative backtracks
  }
  fit.beta = x;
  fit.objective = full(x);
  fit.kkt_residual = logistic_kkt(ds, x, lambda, p);
  if (!fit.converged) fit.separable = separates(x);
  return fit;
}

// OLS -------------------------------------------------------------------------

FitResult fit_ols(const Dataset& ds) {
  if (ds.kind() != TaskKind::regression) {
    throw Error(ErrorCode::kind_mismatch, "OLS requires a regression dataset");
  }
  if (ds.n() < ds.d()) {
    throw Error(ErrorCode::rank_deficient, "OLS is not applicable: n = " + std::to_string(ds.n()) +
                                               " < d = " + std::to_string(ds.d()));
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(ds.x());
  if (qr.rank() < ds.d()) {
    throw Error(ErrorCode::rank_deficient,
                "design matrix has rank " + std::to_string(qr.rank()) + " < d = " + std::to_string(ds.d()));
  }
  FitResult fit;
  fit.beta = qr.solve(ds.y());
  const Vector resid = ds.y() - ds.x() * fit.beta;
  const double n = static_cast<double>(ds.n());
  fit.objective = resid.squaredNorm() / n;
  fit.kkt_residual = (ds.x().transpose() * resid).cwiseAbs().maxCoeff() / n;
  fit.iterations = 1;
  fit.converged = true;
  return fit;
}

// Cross-validation --------------------------------------------------------------

std::vector<double> log_grid(double lambda_max, std::size_t points, double ratio) {
  if (points == 0) return {};
  if (!(lambda_max > 0.0) || !(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::config, "log grid needs lambda_max > 0 and ratio in (0, 1)");
  }
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k) {
    const double frac = points == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(points - 1);
    grid[k] = lambda_max * std::pow(ratio, frac);
  }
  return grid;
}

CvResult cross_validate_lambda(const Dataset& ds, const std::vector<double>& grid,
                               CvObjective objective, RngSeed seed, CvOptions opts) {
  if (grid.empty()) throw Error(ErrorCode::config, "cross-validation grid is empty");
  if (opts.folds < 2) throw Error(ErrorCode::config, "cross-validation needs at least two folds");
  const auto n = static_cast<std::size_t>(ds.n());
  if (opts.folds > n) {
    throw Error(ErrorCode::config, "more folds than rows: some fold would be empty");
  }
  const TaskKind expected = objective == CvObjective::sqrt_lasso ? TaskKind::regression : TaskKind::binary;
  if (ds.kind() != expected) throw Error(ErrorCode::kind_mismatch, "CV objective does not match dataset kind");

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto gen = seed.stream(0);
  std::shuffle(order.begin(), order.end(), gen);

  const std::size_t folds = opts.folds;
  std::vector<std::vector<double>> fold_loss(folds, std::vector<double>(grid.size(), 0.0));
  parallel_for(folds, opts.threads, [&](std::size_t k) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t pos = 0; pos < n; ++pos) (pos % folds == k ? test : train).push_back(order[pos]);
    if (train.empty()) throw Error(ErrorCode::config, "cross-validation fold has an empty training set");
    const Dataset tr = ds.subset(train);
    const Dataset te = ds.subset(test);
    // identical lambdas share one fit so duplicated grid entries tie exactly
    std::map<double, double> cache;
    FitOptions fit_opts = opts.fit;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      auto it = cache.find(grid[g]);
      if (it == cache.end()) {
        double loss = 0.0;
        if (objective == CvObjective::sqrt_lasso) {
          const auto fit = fit_sqrt_lasso(tr, grid[g], opts.penalty, fit_opts);
          loss = dro::mean_squared_error(te, fit.beta);
          fit_opts.initial = fit.beta;
        } else {
          const auto fit = fit_logistic_lp(tr, grid[g], opts.penalty, fit_opts);
          loss = dro::logistic_loss(te, fit.beta);
          fit_opts.initial = fit.beta;
        }
        it = cache.emplace(grid[g], loss).first;
      }
      fold_loss[k][g] = it->second;
    }
  });

  CvResult out;
  out.mean_loss.assign(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t k = 0; k < folds; ++k) out.mean_loss[g] += fold_loss[k][g];
    out.mean_loss[g] /= static_cast<double>(folds);
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    if (out.mean_loss[g] < out.mean_loss[best]) best = g;
  }
  out.lambda = grid[best];
  return out;
}

}  // namespace rwpi::solvers
