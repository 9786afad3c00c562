#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rwpi/core.hpp"

namespace rwpi::limits {

enum class LimitLaw { rbar_rho, rbar_one, l1, l2, l4 };

std::string to_string(LimitLaw law);
LimitLaw parse_law(const std::string& name);

/// Square root of a covariance matrix, L L^T = Sigma. Eigenvalues below
/// 1e-12 (relative to the largest) are treated as zero.
class CovarianceFactor {
 public:
  static CovarianceFactor from_covariance(const Matrix& sigma, std::string id = "plug-in");
  /// Sigma_{kj} = rho^{|k-j|} with its exact lower-triangular root.
  static CovarianceFactor autoregressive(Eigen::Index d, double rho);
  static CovarianceFactor identity(Eigen::Index d);

  [[nodiscard]] const Matrix& root() const noexcept { return root_; }
  [[nodiscard]] Eigen::Index dim() const noexcept { return root_.rows(); }
  [[nodiscard]] const std::string& id() const noexcept { return id_; }
  [[nodiscard]] Matrix covariance() const { return root_ * root_.transpose(); }

  /// Z = L z with z standard normal drawn from `gen`.
  [[nodiscard]] Vector draw(std::mt19937_64& gen) const;

 private:
  CovarianceFactor(Matrix root, std::string id) : root_(std::move(root)), id_(std::move(id)) {}
  Matrix root_;
  std::string id_;
};

/// Parameters recorded with a batch.
struct LawMeta {
  double rho = 0.0;
  std::string exponent;      // p for R-bar/L1 penalties, q for L2/L4 norms
  std::string factor_id;
  Eigen::Index saa_size = 0;
  double error_factor = 0.0;  // L2 only
  int not_converged = 0;      // draws whose inner solve stopped early
  double max_residual = 0.0;
};

struct LimitSampleBatch {
  LimitLaw law = LimitLaw::l2;
  std::vector<double> values;
  RngSeed seed;
  LawMeta meta;
};

struct SolveOptions {
  double tol = 1e-8;
  int max_iter = 5000;
  double ceiling = 1e12;  // objective or multiplier norm beyond this is unbounded
  Eigen::Index saa_size = 1000;
  int threads = 1;
  // last smoothing width for p in {1, inf}, relative to the typical |B_i z|
  double smoothing_floor = 1e-7;
};

// Per-draw solvers (deterministic given the Gaussian vector) ----------------

struct DrawValue {
  double value = 0.0;
  double residual = 0.0;
  bool converged = true;
};

/// max_zeta { rho zeta^T H - (rho-1) mean_i ||Dh_i^T zeta||_p^{rho/(rho-1)} }.
DrawValue rbar_value(double rho, const Vector& h, std::span<const Matrix> dh, Exponent p,
                     const SolveOptions& opts = {});
/// max zeta^T H subject to ||Dh_i^T zeta||_p <= 1 for every i.
DrawValue rbar_one_value(const Vector& h, std::span<const Matrix> dh, Exponent p,
                         const SolveOptions& opts = {});
/// max_xi { 2 sigma xi^T Z - mean_i ||e_i xi - (xi^T X_i) beta||_p^2 }.
DrawValue l1_value(double sigma, const Vector& beta_star, const Matrix& x_sample,
                   const Vector& e_sample, const Vector& z, Exponent p,
                   const SolveOptions& opts = {});
double l2_value(const Vector& z, Exponent q, double error_factor);
double l4_value(const Vector& z, Exponent q);

/// pi / (pi - 2): E[e^2] / Var|e| for centered normal errors.
double normal_error_factor();
/// Plug-in E[e^2] / (E[e^2] - (E|e|)^2) from an error sample.
double error_factor_from_sample(const Vector& e);

// Samplers. Draw i uses seed.stream(i) only, so batches are reproducible and
// independent of the thread count. ----------------------------------------

/// Draws of R-bar(rho), rho > 1. H ~ N(0, sample covariance of h rows).
LimitSampleBatch sample_rbar(double rho, const Matrix& h_samples, std::span<const Matrix> dh_samples,
                             Exponent p, std::size_t n_draws, RngSeed seed,
                             const SolveOptions& opts = {});
LimitSampleBatch sample_rbar_one(const Matrix& h_samples, std::span<const Matrix> dh_samples,
                                 Exponent p, std::size_t n_draws, RngSeed seed,
                                 const SolveOptions& opts = {});
LimitSampleBatch sample_l1(double sigma, const Vector& beta_star, const Matrix& x_sample,
                           const Vector& e_sample, const CovarianceFactor& sigma_factor, Exponent p,
                           std::size_t n_draws, RngSeed seed, const SolveOptions& opts = {});
LimitSampleBatch sample_l2(const CovarianceFactor& sigma_factor, Exponent q, double error_factor,
                           std::size_t n_draws, RngSeed seed, int threads = 1);
LimitSampleBatch sample_l4(const CovarianceFactor& second_moment_factor, Exponent q,
                           std::size_t n_draws, RngSeed seed, int threads = 1);

// Quantiles -------------------------------------------------------------------

struct QuantileEstimate {
  double level = 0.0;
  double value = 0.0;
  std::size_t sample_size = 0;
  double standard_error = 0.0;
};

/// Type-1 (inverse ECDF) empirical quantile: the smallest order statistic
/// whose ECDF reaches `level`.
double empirical_quantile(std::span<const double> values, double level);

/// Empirical quantile with a 200-resample bootstrap standard error.
QuantileEstimate quantile(std::span<const double> values, double level, RngSeed bootstrap_seed,
                          int resamples = 200);
QuantileEstimate quantile(const LimitSampleBatch& batch, double level);

/// (pi/(pi-2)) Phi^{-1}(1 - alpha/(2d)) / sqrt(n).
double lambda_highdim(std::size_t n, std::size_t d, double alpha);

/// Standard normal quantile, accurate to ~1e-15 absolute.
double normal_quantile(double p);
/// Upper-tail form Phi^{-1}(1 - tail) computed without cancellation.
double normal_upper_quantile(double tail);

/// Plug-in E||X||_inf / sqrt(n).
double growth_C(const Matrix& x_sample, std::size_t n);

/// law,index,value rows with a header.
void write_batch_csv(std::ostream& out, const LimitSampleBatch& batch);

}  // namespace rwpi::limits
