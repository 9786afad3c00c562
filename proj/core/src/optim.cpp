#include "optim.hpp"

#include <cmath>
#include <deque>

namespace rwpi::detail {

AscentResult maximize_concave(const ConcaveObjective& f, Vector x0, const AscentOptions& opts) {
  AscentResult res;
  const auto n = x0.size();
  Vector x = std::move(x0);
  Vector g(n);
  double fx = f(x, &g);
  if (!std::isfinite(fx)) {
    throw Error(ErrorCode::invalid_argument, "ascent started outside the objective domain");
  }
  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;
  Vector g_new(n);

  double last_step = 1.0;
  std::deque<double> recent;  // objective values of the last few iterates
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    res.grad_norm = g.norm();
    if (res.grad_norm <= opts.tol) {
      res.converged = true;
      break;
    }
    if (fx > opts.ceiling || x.norm() > opts.max_norm) {
      res.unbounded = true;
      break;
    }
    // two-loop recursion on the negated objective
    Vector q = g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * s_hist[k].dot(q);
      q -= alpha[k] * y_hist[k];
    }
    if (!s_hist.empty()) {
      const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      q *= gamma;
    } else {
      q /= std::max(1.0, g.norm());
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(q);
      q += (alpha[k] - beta) * s_hist[k];
    }
    Vector dir = q;  // ascent direction for f
    double slope = g.dot(dir);
    if (!(slope > 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = g / std::max(1.0, g.norm());
      slope = g.dot(dir);
    }

    // gradient steps reuse (and grow) the last accepted length so linear
    // growth toward an unbounded supremum is detected in few iterations
    double t = s_hist.empty() ? std::min(1e8, 2.0 * last_step) : 1.0;
    bool accepted = false;
    double f_new = 0.0;
    Vector x_new(n);
    for (int bt = 0; bt < 80; ++bt) {
      x_new = x + t * dir;
      f_new = f(x_new, &g_new);
      if (std::isfinite(f_new) && f_new >= fx + opts.armijo * t * slope) {
        accepted = true;
        break;
      }
      if (f_new == std::numeric_limits<double>::infinity()) {
        res.unbounded = true;
        break;
      }
      t *= 0.5;
    }
    if (res.unbounded) break;
    if (!accepted) {
      if (!s_hist.empty()) {
        // retry once along the raw gradient before giving up
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        continue;
      }
      res.stalled = true;
      break;
    }
    if (s_hist.empty()) last_step = t;
    Vector s = x_new - x;
    Vector y = g - g_new;  // curvature pair for -f
    const double sy = s.dot(y);
    if (opts.memory > 0 && sy > 1e-16 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    const double previous = fx;
    x = x_new;
    fx = f_new;
    g = g_new;
    if (fx > opts.ceiling) {
      res.unbounded = true;
      break;
    }
    // relative progress has vanished in floating point
    if (fx - previous <= 1e-16 * std::max(1.0, std::abs(fx))) {
      res.stalled = g.norm() > opts.tol;
      ++it;
      break;
    }
    if (opts.value_tol > 0.0) {
      recent.push_back(fx);
      if (recent.size() > 5) {
        recent.pop_front();
        if (fx - recent.front() <= opts.value_tol * std::max(1.0, std::abs(fx))) {
          res.value_stationary = true;
          ++it;
          break;
        }
      }
    }
  }
  res.iterations = it;
  res.grad_norm = g.norm();
  if (res.grad_norm <= opts.tol) res.converged = true;
  res.x = std::move(x);
  res.value = fx;
  return res;
}

}  // namespace rwpi::detail
