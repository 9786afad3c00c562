#pragma once

#include <optional>
#include <string>

#include "rwpi/core.hpp"

namespace rwpi::dro {

enum class WorstCaseForm {
  closed_linear,
  closed_linear_barbeta,
  closed_logistic,
  closed_hinge,
  dual_numeric,
};

std::string to_string(WorstCaseForm form);

/// Worst-case expected loss over a Wasserstein ball of radius delta around
/// the empirical measure.
struct WorstCase {
  double value = 0.0;
  std::optional<double> gamma;  // optimal dual multiplier (numeric form)
  WorstCaseForm form = WorstCaseForm::closed_linear;
};

/// (1/n) sum (y_i - beta^T x_i)^2
double mean_squared_error(const Dataset& ds, const Vector& beta);
/// (1/n) sum log(1 + exp(-y_i beta^T x_i))
double logistic_loss(const Dataset& ds, const Vector& beta);
/// (1/n) sum (1 - y_i beta^T x_i)^+
double hinge_loss(const Dataset& ds, const Vector& beta);

/// Square loss, cost N_q^2 (use_barbeta = false, penalty on beta) or the
/// unmodified ||.||_q^2 (use_barbeta = true, penalty on (-beta, 1)):
/// (sqrt(MSE) + sqrt(delta) ||v||_p)^2.
WorstCase worstcase_linear_closed(const Dataset& ds, const Vector& beta, double delta, Exponent p,
                                  bool use_barbeta = false);

/// Log-exponential loss under cost N_q: empirical loss + delta ||beta||_p.
WorstCase worstcase_logistic_closed(const Dataset& ds, const Vector& beta, double delta, Exponent p);

/// Hinge loss under cost N_q: empirical hinge loss + delta ||beta||_p.
WorstCase worstcase_hinge_closed(const Dataset& ds, const Vector& beta, double delta, Exponent p);

/// Square loss through the one-dimensional dual
///   min_{gamma > ||v||_p^2} gamma delta + gamma / (gamma - ||v||_p^2) MSE,
/// minimized by golden-section search.
WorstCase worstcase_dual_numeric(const Dataset& ds, const Vector& beta, double delta, Exponent p,
                                 bool use_barbeta = false);

/// The dual objective above at a given gamma (+inf when gamma <= ||v||_p^2).
double linear_dual_objective(double gamma, double delta, double v_norm_sq, double mse);

}  // namespace rwpi::dro
