#pragma once

// Reference computations used only by the tests. None of them call into the
// library's solvers; they share nothing but Eigen.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Accelerated projected gradient with backtracking and function restart.
struct ProjectedProblem {
  std::function<double(const Vector&, Vector*)> f;  // smooth part with gradient
  std::function<Vector(const Vector&)> project;
};

struct ProjectedResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
};

inline ProjectedResult projected_gradient(const ProjectedProblem& pb, Vector x0, int max_iter = 200000,
                                          double step_tol = 1e-15) {
  Vector x = pb.project(x0);
  Vector y = x;
  Vector g;
  double fx = pb.f(x, nullptr);
  double t = 1.0;
  double lip = 1.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    const double fy = pb.f(y, &g);
    Vector next;
    double fn = 0.0;
    while (true) {
      next = pb.project(y - g / lip);
      fn = pb.f(next, nullptr);
      const Vector d = next - y;
      if (fn <= fy + g.dot(d) + 0.5 * lip * d.squaredNorm() + 1e-15 * std::abs(fy)) break;
      lip *= 2.0;
    }
    const double moved = (next - x).norm();
    if (fn > fx) {
      // restart momentum
      t = 1.0;
      y = x;
      lip *= 2.0;
      continue;
    }
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / tn) * (next - x);
    x = next;
    fx = fn;
    t = tn;
    lip *= 0.95;
    if (moved <= step_tol * (1.0 + x.norm())) break;
  }
  return {x, fx, it};
}

inline Vector project_nonnegative(const Vector& v) { return v.cwiseMax(0.0); }

// (beta, t) with ||beta||_2 <= t
inline Vector project_second_order_cone(const Vector& v) {
  const Eigen::Index d = v.size() - 1;
  const Vector b = v.head(d);
  const double t = v[d];
  const double nb = b.norm();
  if (nb <= t) return v;
  if (nb <= -t) return Vector::Zero(v.size());
  const double s = 0.5 * (nb + t);
  Vector out(v.size());
  out.head(d) = b * (s / nb);
  out[d] = s;
  return out;
}

// Penalized objective loss(beta) + lambda ||beta||_p for p in {1, 2}, lifted to a
// smooth objective over a cone: split variables for p = 1 and the epigraph
// of the Euclidean norm for p = 2.
inline double reference_penalized(const std::function<double(const Vector&, Vector*)>& loss,
                                  Eigen::Index d, double lambda, int p, Vector* beta_out = nullptr) {
  ProjectedProblem pb;
  Vector x0;
  if (p == 1) {
    pb.f = [&](const Vector& z, Vector* g) {
      const Vector beta = z.head(d) - z.tail(d);
      Vector gb;
      const double v = loss(beta, g != nullptr ? &gb : nullptr) + lambda * z.sum();
      if (g != nullptr) {
        g->resize(2 * d);
        g->head(d) = gb.array() + lambda;
        g->tail(d) = -gb.array() + lambda;
      }
      return v;
    };
    pb.project = project_nonnegative;
    x0 = Vector::Zero(2 * d);
  } else {
    pb.f = [&](const Vector& z, Vector* g) {
      Vector gb;
      const double v = loss(z.head(d), g != nullptr ? &gb : nullptr) + lambda * z[d];
      if (g != nullptr) {
        g->resize(d + 1);
        g->head(d) = gb;
        (*g)[d] = lambda;
      }
      return v;
    };
    pb.project = project_second_order_cone;
    x0 = Vector::Zero(d + 1);
  }
  const auto res = projected_gradient(pb, x0);
  if (beta_out != nullptr) {
    *beta_out = p == 1 ? Vector(res.x.head(d) - res.x.tail(d)) : Vector(res.x.head(d));
  }
  return res.value;
}

inline double reference_sqrt_lasso(const Matrix& x, const Vector& y, double lambda, int p,
                                   Vector* beta = nullptr) {
  const double n = static_cast<double>(x.rows());
  auto loss = [&](const Vector& b, Vector* g) {
    const Vector r = y - x * b;
    const double nr = r.norm();
    if (g != nullptr) *g = nr > 0.0 ? Vector(-x.transpose() * r / (nr * std::sqrt(n))) : Vector::Zero(b.size());
    return nr / std::sqrt(n);
  };
  return reference_penalized(loss, x.cols(), lambda, p, beta);
}

inline double reference_logistic(const Matrix& x, const Vector& y, double lambda, int p,
                                 Vector* beta = nullptr) {
  const double n = static_cast<double>(x.rows());
  auto loss = [&](const Vector& b, Vector* g) {
    const Vector m = y.cwiseProduct(x * b);
    double v = 0.0;
    Vector w(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      // log(1 + exp(-m)) and its derivative -1 / (1 + exp(m))
      v += m[i] > 0 ? std::log1p(std::exp(-m[i])) : -m[i] + std::log1p(std::exp(m[i]));
      w[i] = -1.0 / (1.0 + std::exp(m[i]));
    }
    if (g != nullptr) *g = x.transpose() * w.cwiseProduct(y) / n;
    return v / n;
  };
  return reference_penalized(loss, x.cols(), lambda, p, beta);
}

// Primal optimal transport for the linear-regression moment condition with
// response-preserving squared Euclidean cost:
//   min (1/n) sum ||u_i - x_i||^2  s.t.  (1/n) sum (y_i - beta^T u_i) u_i = 0,
// by an augmented Lagrangian over deterministic maps u_i. Any feasible map
// gives an upper bound on the profile value.
struct TransportResult {
  double value = 0.0;
  double violation = 0.0;
  Matrix u;
};

inline TransportResult primal_transport_linear(const Matrix& x, const Vector& y, const Vector& beta) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const double nn = static_cast<double>(n);
  auto constraint = [&](const Matrix& u) {
    Vector g = Vector::Zero(d);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vector ui = u.row(i).transpose();
      g += (y[i] - beta.dot(ui)) * ui;
    }
    return Vector(g / nn);
  };
  Matrix u = x;
  Vector mult = Vector::Zero(d);
  double c = 10.0;
  auto lagrangian = [&](const Matrix& uu, Matrix* grad) {
    const Vector g = constraint(uu);
    const double cost = (uu - x).squaredNorm() / nn;
    const Vector w = mult + c * g;
    if (grad != nullptr) {
      grad->resize(n, d);
      for (Eigen::Index i = 0; i < n; ++i) {
        const Vector ui = uu.row(i).transpose();
        // Jacobian of (y - beta^T u) u is (y - beta^T u) I - u beta^T
        const Vector gi = (y[i] - beta.dot(ui)) * w - beta * ui.dot(w);
        grad->row(i) = (2.0 * (ui - x.row(i).transpose()) + gi).transpose() / nn;
      }
    }
    return cost + mult.dot(g) + 0.5 * c * g.squaredNorm();
  };
  for (int outer = 0; outer < 200; ++outer) {
    // gradient descent with Barzilai-Borwein steps and an Armijo safeguard
    Matrix grad;
    double f = lagrangian(u, &grad);
    double step = 1e-2;
    Matrix prev_u = u;
    Matrix prev_g = grad;
    for (int it = 0; it < 20000; ++it) {
      double s = step;
      Matrix cand;
      double fc = 0.0;
      while (true) {
        cand = u - s * grad;
        fc = lagrangian(cand, nullptr);
        if (fc <= f - 1e-4 * s * grad.squaredNorm() || s < 1e-20) break;
        s *= 0.5;
      }
      prev_u = u;
      prev_g = grad;
      u = cand;
      f = lagrangian(u, &grad);
      const Matrix du = u - prev_u;
      const Matrix dg = grad - prev_g;
      const double denom = (du.array() * dg.array()).sum();
      step = denom > 0.0 ? du.squaredNorm() / denom : 1e-2;
      if (grad.norm() < 1e-13) break;
    }
    const Vector g = constraint(u);
    mult += c * g;
    if (g.norm() < 1e-12) break;
    c = std::min(c * 2.0, 1e6);
  }
  return {(u - x).squaredNorm() / nn, constraint(u).norm(), u};
}

// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
inline double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    worst = std::max({worst, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return worst;
}

inline double half_normal_cdf(double t) { return t <= 0.0 ? 0.0 : std::erf(t / std::numbers::sqrt2); }

// Standard normal upper quantile Phi^{-1}(1 - tail) at 50 decimal digits by
// Newton iteration on erfc.
inline double hp_normal_upper_quantile(double tail) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  const Big target = Big(tail);
  const Big root2 = boost::multiprecision::sqrt(Big(2));
  const Big pi = boost::math::constants::pi<Big>();
  Big z = 0;
  // 1 - Phi(z) = erfc(z / sqrt 2) / 2, derivative -phi(z)
  for (int it = 0; it < 200; ++it) {
    const Big upper = boost::math::erfc(z / root2) / 2;
    const Big density = boost::multiprecision::exp(-z * z / 2) / boost::multiprecision::sqrt(2 * pi);
    Big stepz = (upper - target) / density;
    if (stepz > 2) stepz = 2;
    if (stepz < -2) stepz = -2;
    z += stepz;
    if (boost::multiprecision::abs(stepz) < Big("1e-40")) break;
  }
  return static_cast<double>(z);
}

inline double hp_lambda_highdim(double n, double d, double alpha) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  const Big pi = boost::math::constants::pi<Big>();
  const Big factor = pi / (pi - 2);
  return static_cast<double>(factor * Big(hp_normal_upper_quantile(alpha / (2.0 * d))) /
                             boost::multiprecision::sqrt(Big(n)));
}

}  // namespace oracle
