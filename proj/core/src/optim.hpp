#pragma once

#include <functional>
#include <limits>

#include "rwpi/core.hpp"

namespace rwpi::detail {

/// Objective value with optional gradient output. Returning -inf marks the
/// point as outside the domain; line searches back off from it.
using ConcaveObjective = std::function<double(const Vector& x, Vector* grad)>;

struct AscentOptions {
  double tol = 1e-8;           // stop when ||grad||_2 <= tol
  int max_iter = 10000;
  double armijo = 1e-4;
  int memory = 8;              // L-BFGS history; 0 gives plain gradient ascent
  double ceiling = std::numeric_limits<double>::infinity();
  double max_norm = std::numeric_limits<double>::infinity();
  // when > 0, also stop once five iterations gain less than this, relative
  double value_tol = 0.0;
};

struct AscentResult {
  Vector x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool unbounded = false;  // value exceeded ceiling or iterate left max_norm ball
  bool stalled = false;    // line search could not make progress
  bool value_stationary = false;  // stopped by value_tol
};

/// Quasi-Newton (L-BFGS) ascent with Armijo backtracking for a concave
/// objective. The starting point must lie in the domain.
AscentResult maximize_concave(const ConcaveObjective& f, Vector x0, const AscentOptions& opts);

}  // namespace rwpi::detail
