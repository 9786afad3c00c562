#include "rwpi/profile.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "optim.hpp"

namespace rwpi::profile {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// strict margin on the smallest eigenvalue of M(lambda)
constexpr double kFeasibilityMargin = 1e-9;

}  // namespace

std::string to_string(RwpMethod m) {
  switch (m) {
    case RwpMethod::mean_closed_form: return "mean-closed-form";
    case RwpMethod::linear_q2_dual: return "linear-q2-dual";
    case RwpMethod::generic_dual: return "generic-dual";
  }
  return "unknown";
}

RwpValue rwp_mean(std::span<const double> samples, double theta, double rho) {
  if (samples.empty()) throw Error(ErrorCode::empty_input, "rwp_mean needs at least one sample");
  if (!(rho >= 1.0)) throw Error(ErrorCode::invalid_argument, "transport power rho must be >= 1");
  double sum = 0.0;
  for (double w : samples) {
    if (!std::isfinite(w)) throw Error(ErrorCode::invalid_argument, "non-finite sample");
    sum += w;
  }
  const double gap = sum / static_cast<double>(samples.size()) - theta;
  RwpValue out;
  out.method = RwpMethod::mean_closed_form;
  out.value = std::pow(std::abs(gap), rho);
  out.converged = true;
  // maximizer of -lambda*gap - (rho-1)|lambda/rho|^{rho/(rho-1)}
  const double sign = gap > 0 ? 1.0 : (gap < 0 ? -1.0 : 0.0);
  out.dual_point = Vector::Constant(1, -sign * rho * std::pow(std::abs(gap), rho - 1.0));
  if (rho == 1.0) out.dual_point[0] = -sign;
  return out;
}

// Linear regression, q = 2, rho = 2 ----------------------------------------
//
// For each sample the inner problem is
//   sup_u { lambda^T (y - beta^T u) u - ||u - x||^2 }
//     = sup_u { -u^T M u + b^T u } - ||x||^2,
// with M = I + (beta lambda^T + lambda beta^T)/2 and b = y lambda + 2x.
// M has eigenvalues 1 on span{beta, lambda}^perp and
// 1 + (beta^T lambda +- ||beta|| ||lambda||)/2 on the span, so the supremum
// is finite iff the smaller one is positive, and then equals
// b^T M^{-1} b / 4 - ||x||^2 at u = M^{-1} b / 2.

namespace {

struct LinearQ2Eval {
  double value = kNegInf;
  Vector grad;
  Matrix u;
};

// M^{-1} v via Woodbury on the rank-2 update B C B^T, B = [beta lambda].
class RankTwoInverse {
 public:
  RankTwoInverse(const Vector& beta, const Vector& lambda) : basis_(beta.size(), 2) {
    basis_.col(0) = beta;
    basis_.col(1) = lambda;
    Eigen::Matrix2d core;
    core << 0.0, 2.0, 2.0, 0.0;  // C^{-1} for C = [[0, 1/2], [1/2, 0]]
    core += basis_.transpose() * basis_;
    inner_ = core.fullPivLu();
  }

  [[nodiscard]] Vector apply(const Vector& v) const {
    const Eigen::Vector2d t = inner_.solve(basis_.transpose() * v);
    return v - basis_ * t;
  }

 private:
  Eigen::MatrixXd basis_;
  Eigen::FullPivLU<Eigen::Matrix2d> inner_;
};

LinearQ2Eval eval_linear_q2(const Dataset& ds, const Vector& beta, const Vector& lambda,
                            bool want_points) {
  LinearQ2Eval ev;
  const double min_eig = 1.0 + 0.5 * (beta.dot(lambda) - beta.norm() * lambda.norm());
  if (!(min_eig > kFeasibilityMargin)) return ev;

  const auto n = ds.n();
  const auto d = ds.d();
  ev.grad = Vector::Zero(d);
  if (want_points) ev.u.resize(n, d);
  double total = 0.0;
  const bool degenerate = beta.squaredNorm() == 0.0 || lambda.squaredNorm() == 0.0;
  std::optional<RankTwoInverse> inv;
  if (!degenerate) inv.emplace(beta, lambda);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector x = ds.x().row(i).transpose();
    const double y = ds.y()[i];
    const Vector b = y * lambda + 2.0 * x;
    Vector u = degenerate ? Vector(0.5 * b) : Vector(0.5 * inv->apply(b));
    // sup value = b^T u / 2 - ||x||^2
    total += 0.5 * b.dot(u) - x.squaredNorm();
    ev.grad -= (y - beta.dot(u)) * u;
    if (want_points) ev.u.row(i) = u.transpose();
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  ev.value = -total * inv_n;
  ev.grad *= inv_n;
  return ev;
}

void require_regression(const Dataset& ds, const Vector& beta) {
  if (ds.kind() != TaskKind::regression) {
    throw Error(ErrorCode::kind_mismatch, "linear profile requires a regression dataset");
  }
  if (beta.size() != ds.d()) throw Error(ErrorCode::dimension, "beta length does not match d");
  if (!beta.allFinite()) throw Error(ErrorCode::invalid_argument, "beta must be finite");
  if (ds.n() == 0) throw Error(ErrorCode::empty_input, "empty dataset");
}

}  // namespace

double linear_q2_dual_objective(const Dataset& ds, const Vector& beta, const Vector& lambda) {
  require_regression(ds, beta);
  if (lambda.size() != ds.d()) throw Error(ErrorCode::dimension, "lambda length does not match d");
  return eval_linear_q2(ds, beta, lambda, false).value;
}

RwpValue rwp_linear_q2(const Dataset& ds, const Vector& beta, LinearQ2Options opts) {
  require_regression(ds, beta);
  detail::AscentOptions ao;
  ao.tol = opts.tol;
  ao.max_iter = opts.max_iter;
  ao.armijo = 1e-4;
  auto objective = [&](const Vector& lambda, Vector* grad) {
    auto ev = eval_linear_q2(ds, beta, lambda, false);
    if (grad != nullptr && std::isfinite(ev.value)) *grad = ev.grad;
    return ev.value;
  };
  const auto res = detail::maximize_concave(objective, Vector::Zero(ds.d()), ao);

  RwpValue out;
  out.method = RwpMethod::linear_q2_dual;
  out.dual_point = res.x;
  out.iterations = res.iterations;
  out.residual = res.grad_norm;
  out.converged = res.converged;
  // the dual value is >= 0 because lambda = 0 is feasible with value 0
  out.value = std::max(0.0, res.value);
  out.transported = eval_linear_q2(ds, beta, res.x, true).u;
  return out;
}

// Generic dual -----------------------------------------------------------------

double transport_cost(const Vector& d, Exponent q, double rho, Vector* grad) {
  const double nrm = lp_norm(d, q);
  if (grad != nullptr) {
    grad->setZero(d.size());
    if (nrm > 0.0) {
      const double outer = rho * std::pow(nrm, rho - 1.0);
      if (q.is_infinite()) {
        Eigen::Index j = 0;
        d.cwiseAbs().maxCoeff(&j);
        (*grad)[j] = outer * (d[j] > 0 ? 1.0 : -1.0);
      } else if (q.value() == 1.0) {
        *grad = outer * d.array().sign().matrix();
      } else {
        const double e = q.value() - 1.0;
        for (Eigen::Index k = 0; k < d.size(); ++k) {
          const double a = std::abs(d[k]) / nrm;
          (*grad)[k] = outer * std::pow(a, e) * (d[k] > 0 ? 1.0 : (d[k] < 0 ? -1.0 : 0.0));
        }
      }
    }
  }
  return std::pow(nrm, rho);
}

namespace {

struct InnerSolution {
  double value = kNegInf;
  Vector u;
  bool unbounded = false;
};

class GenericDualProblem {
 public:
  GenericDualProblem(const Matrix& samples, const EstimatingEquation& eq, const Vector& theta,
                     const CostSpec& cost, const GenericDualOptions& opts)
      : samples_(samples), eq_(eq), theta_(theta), cost_(cost), opts_(opts) {
    cost_.validate();
    if (samples_.cols() != eq_.dims.m) {
      throw Error(ErrorCode::dimension, "sample width " + std::to_string(samples_.cols()) +
                                            " does not match equation dimension m = " +
                                            std::to_string(eq_.dims.m));
    }
    if (theta_.size() != eq_.dims.l) {
      throw Error(ErrorCode::dimension, "theta length does not match equation dimension l");
    }
    if (samples_.rows() == 0) throw Error(ErrorCode::empty_input, "no samples");
    free_ = cost_.modified ? eq_.dims.m - 1 : eq_.dims.m;
    if (free_ < 1) throw Error(ErrorCode::dimension, "modified cost leaves no movable coordinate");
    // fixed perturbation offsets per sample keep the dual objective a
    // deterministic function of lambda
    offsets_.resize(static_cast<std::size_t>(samples_.rows()));
    for (Eigen::Index i = 0; i < samples_.rows(); ++i) {
      auto gen = opts_.seed.stream(static_cast<std::uint64_t>(i));
      Matrix off(free_, opts_.starts);
      for (int s = 0; s < opts_.starts; ++s) fill_standard_normal(gen, off.col(s));
      offsets_[static_cast<std::size_t>(i)] = opts_.perturb_scale * off;
    }
  }

  InnerSolution solve_inner(Eigen::Index i, const Vector& lambda) const {
    const Vector w = samples_.row(i).transpose();
    auto phi = [&](const Vector& z, Vector* grad) {
      Vector u = w;
      u.head(free_) = z;
      const Vector diff = z - w.head(free_);
      Vector cgrad;
      const double c = transport_cost(diff, cost_.q, cost_.rho, grad ? &cgrad : nullptr);
      const double val = lambda.dot(eq_.eval(u, theta_)) - c;
      if (grad != nullptr) {
        const Matrix j = eq_.jacobian(u, theta_);
        *grad = (j.leftCols(free_).transpose() * lambda) - cgrad;
      }
      return std::isfinite(val) ? val : kNegInf;
    };
    detail::AscentOptions ao;
    ao.tol = opts_.tol * 1e-2;
    ao.max_iter = opts_.inner_max;
    ao.ceiling = opts_.ceiling;
    InnerSolution best;
    for (int s = -1; s < opts_.starts; ++s) {
      Vector z0 = w.head(free_);
      if (s >= 0) z0 += offsets_[static_cast<std::size_t>(i)].col(s);
      if (!std::isfinite(phi(z0, nullptr))) continue;
      const auto res = detail::maximize_concave(phi, z0, ao);
      if (res.unbounded) {
        best.unbounded = true;
        best.value = std::numeric_limits<double>::infinity();
        return best;
      }
      if (res.value > best.value) {
        best.value = res.value;
        best.u = w;
        best.u.head(free_) = res.x;
      }
    }
    return best;
  }

  // Dual objective and gradient -(1/n) sum h(u_i*, theta).
  double evaluate(const Vector& lambda, Vector* grad, Matrix* points, bool* unbounded) const {
    const auto n = samples_.rows();
    double total = 0.0;
    Vector g = Vector::Zero(eq_.dims.r);
    if (points != nullptr) points->resize(n, eq_.dims.m);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto sol = solve_inner(i, lambda);
      if (sol.unbounded || !std::isfinite(sol.value)) {
        if (unbounded != nullptr) *unbounded = true;
        return kNegInf;
      }
      total += sol.value;
      g -= eq_.eval(sol.u, theta_);
      if (points != nullptr) points->row(i) = sol.u.transpose();
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    if (grad != nullptr) *grad = g * inv_n;
    return -total * inv_n;
  }

  [[nodiscard]] Eigen::Index r() const { return eq_.dims.r; }

 private:
  const Matrix& samples_;
  const EstimatingEquation& eq_;
  const Vector& theta_;
  CostSpec cost_;
  GenericDualOptions opts_;
  Eigen::Index free_ = 0;
  std::vector<Matrix> offsets_;
};

}  // namespace

double generic_dual_objective(const Matrix& samples, const EstimatingEquation& eq,
                              const Vector& theta, const CostSpec& cost, const Vector& lambda,
                              const GenericDualOptions& opts) {
  GenericDualProblem problem(samples, eq, theta, cost, opts);
  if (lambda.size() != problem.r()) throw Error(ErrorCode::dimension, "lambda length must be r");
  return problem.evaluate(lambda, nullptr, nullptr, nullptr);
}

RwpValue rwp_generic_dual(const Matrix& samples, const EstimatingEquation& eq,
                          const Vector& theta, const CostSpec& cost, GenericDualOptions opts) {
  GenericDualProblem problem(samples, eq, theta, cost, opts);
  bool boundary = false;
  auto objective = [&](const Vector& lambda, Vector* grad) {
    bool unbounded = false;
    const double v = problem.evaluate(lambda, grad, nullptr, &unbounded);
    if (unbounded) boundary = true;
    return v;
  };
  detail::AscentOptions ao;
  ao.tol = opts.tol;
  ao.max_iter = opts.outer_max;
  const auto res = detail::maximize_concave(objective, Vector::Zero(problem.r()), ao);

  RwpValue out;
  out.method = RwpMethod::generic_dual;
  out.dual_point = res.x;
  out.iterations = res.iterations;
  out.residual = res.grad_norm;
  out.hit_dual_boundary = boundary;
  // any unbounded inner problem, even at a rejected trial point, voids the
  // convergence claim
  out.converged = res.converged && !boundary;
  out.value = std::max(0.0, res.value);
  problem.evaluate(res.x, nullptr, &out.transported, nullptr);
  return out;
}

}  // namespace rwpi::profile
