#pragma once

#include <string>
#include <vector>

#include "rwpi/core.hpp"

namespace rwpi::solvers {

/// Penalty norm for the fitters; only l1 and l2 are supported.
enum class PenaltyNorm { l1, l2 };

PenaltyNorm parse_penalty_norm(const std::string& text);
Exponent to_exponent(PenaltyNorm p);

struct FitResult {
  Vector beta;
  double objective = 0.0;
  double kkt_residual = 0.0;  // max violation of subgradient optimality
  int iterations = 0;
  bool converged = false;
  double lambda = 0.0;
  bool separable = false;     // logistic only: unpenalized fit diverging on separable data
  std::vector<double> objective_trace;  // objective after each outer iteration
};

struct FitOptions {
  double tol = 1e-8;
  int max_outer = 10000;      // concomitant updates / proximal steps
  int max_passes = 100000;    // coordinate-descent sweeps in total
  bool record_trace = false;
  Vector initial;             // warm start; empty means zero
};

/// sqrt(MSE_n(beta)) + lambda ||beta||_p by alternating the noise-scale
/// estimate sigma = sqrt(MSE) with a penalized least-squares solve at
/// effective penalty lambda * sigma.
FitResult fit_sqrt_lasso(const Dataset& ds, double lambda, PenaltyNorm p, FitOptions opts = {});

/// mean log(1 + exp(-y beta^T x)) + lambda ||beta||_p by monotone FISTA
/// with backtracking.
FitResult fit_logistic_lp(const Dataset& ds, double lambda, PenaltyNorm p, FitOptions opts = {});

/// Least squares via column-pivoted QR. Throws rank_deficient when n < d
/// or X lacks full column rank.
FitResult fit_ols(const Dataset& ds);

/// Objective values recomputed from scratch.
double sqrt_lasso_objective(const Dataset& ds, const Vector& beta, double lambda, PenaltyNorm p);
double logistic_objective(const Dataset& ds, const Vector& beta, double lambda, PenaltyNorm p);

/// Subgradient optimality violations at beta.
double sqrt_lasso_kkt(const Dataset& ds, const Vector& beta, double lambda, PenaltyNorm p);
double logistic_kkt(const Dataset& ds, const Vector& beta, double lambda, PenaltyNorm p);

/// Smallest lambda for which beta = 0 is optimal.
double sqrt_lasso_zero_threshold(const Dataset& ds, PenaltyNorm p);
double logistic_zero_threshold(const Dataset& ds, PenaltyNorm p);

enum class CvObjective { sqrt_lasso, logistic };

struct CvOptions {
  std::size_t folds = 10;
  PenaltyNorm penalty = PenaltyNorm::l1;
  FitOptions fit;
  int threads = 1;
};

struct CvResult {
  double lambda = 0.0;
  std::vector<double> mean_loss;  // per grid entry
};

/// Grid point with the smallest mean out-of-fold loss (square loss or
/// log-exponential loss); ties go to the first index.
CvResult cross_validate_lambda(const Dataset& ds, const std::vector<double>& grid,
                               CvObjective objective, RngSeed seed, CvOptions opts = {});

/// Log-spaced grid from lambda_max down to lambda_max * ratio.
std::vector<double> log_grid(double lambda_max, std::size_t points, double ratio = 1e-3);

}  // namespace rwpi::solvers
