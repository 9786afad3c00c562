#pragma once

#include <span>
#include <string>

#include "rwpi/core.hpp"

namespace rwpi::profile {

enum class RwpMethod { mean_closed_form, linear_q2_dual, generic_dual };

std::string to_string(RwpMethod m);

/// Value of the robust Wasserstein profile function at one parameter.
struct RwpValue {
  double value = 0.0;
  Vector dual_point;   // maximizing multiplier lambda
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;  // gradient norm of the dual objective at dual_point
  RwpMethod method = RwpMethod::mean_closed_form;
  /// Transported sample locations u_i attaining the inner suprema at
  /// dual_point (one row per sample); empty for the closed form.
  Matrix transported;
  /// Set when some trial multiplier made an inner supremum unbounded.
  bool hit_dual_boundary = false;
};

/// h(w, theta) = w - theta, cost |u - w|^rho: value |mean(W) - theta|^rho.
RwpValue rwp_mean(std::span<const double> samples, double theta, double rho);

struct LinearQ2Options {
  double tol = 1e-8;
  int max_iter = 100000;
};

/// Linear regression estimating equation (y - beta^T x) x with the
/// response-preserving squared Euclidean cost. Inner suprema are solved in
/// closed form; the outer concave dual is maximized numerically.
RwpValue rwp_linear_q2(const Dataset& ds, const Vector& beta, LinearQ2Options opts = {});

/// Dual objective of rwp_linear_q2 at a fixed multiplier (-inf outside the
/// dual-feasible region). Exposed for lower-bound checks.
double linear_q2_dual_objective(const Dataset& ds, const Vector& beta, const Vector& lambda);

struct GenericDualOptions {
  double tol = 1e-6;
  int outer_max = 2000;
  int inner_max = 2000;
  int starts = 8;            // Gaussian perturbations in addition to W_i itself
  double perturb_scale = 1.0;
  double ceiling = 1e12;     // inner objective above this is declared unbounded
  RngSeed seed{0};
};

/// Best-effort dual evaluation for an arbitrary estimating equation and
/// cost ||u - w||_q^rho. With `cost.modified` the last coordinate of each
/// sample row (the response) is held fixed.
RwpValue rwp_generic_dual(const Matrix& samples, const EstimatingEquation& eq,
                          const Vector& theta, const CostSpec& cost,
                          GenericDualOptions opts = {});

/// Dual objective of rwp_generic_dual at a fixed multiplier, with the inner
/// suprema computed by the same multi-start search.
double generic_dual_objective(const Matrix& samples, const EstimatingEquation& eq,
                              const Vector& theta, const CostSpec& cost, const Vector& lambda,
                              const GenericDualOptions& opts = {});

/// Cost ||d||_q^rho and a (sub)gradient with respect to d.
double transport_cost(const Vector& d, Exponent q, double rho, Vector* grad = nullptr);

}  // namespace rwpi::profile
