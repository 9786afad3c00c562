#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rwpi/core.hpp"
#include "rwpi/limit_laws.hpp"
#include "rwpi/solvers.hpp"

namespace rwpi::pipeline {

enum class SelectionMethod { l1, l2, l4, highdim };

std::string to_string(SelectionMethod m);
SelectionMethod parse_selection_method(const std::string& text);

struct RegularizationChoice {
  double alpha = 0.05;
  SelectionMethod method = SelectionMethod::l2;
  std::size_t mc_draws = 0;
  double eta_hat = 0.0;
  double eta_standard_error = 0.0;
  double delta = 0.0;
  double lambda = 0.0;
  RngSeed seed;
  std::size_t n = 0;
  Exponent q = Exponent::infinity();

  /// delta = lambda^2 for linear methods, delta = lambda for L4.
  void validate() const;
};

struct SelectionOptions {
  double alpha = 0.05;
  Exponent q = Exponent::infinity();  // norm of the transport cost
  std::size_t mc_draws = 1000;
  RngSeed seed;
  int threads = 1;
  limits::SolveOptions solve;
};

/// Plug-in inputs for the linear laws. Either a covariance factor or a
/// predictor sample must be present for L1/L2; L1 also needs beta_star and
/// an error sample.
struct LinearSelectionInput {
  std::optional<limits::CovarianceFactor> factor;
  std::optional<Matrix> x_sample;
  std::optional<Vector> beta_star;
  std::optional<Vector> e_sample;
  double sigma = 0.0;  // L1 only; 0 means root mean square of e_sample
  double error_factor = limits::normal_error_factor();
};

RegularizationChoice select_lambda_linear(SelectionMethod method, std::size_t n, std::size_t d,
                                          const LinearSelectionInput& input,
                                          const SelectionOptions& opts);

/// L4 with the plug-in second moment of the predictors; lambda = delta.
RegularizationChoice select_lambda_logistic(const Dataset& ds, const SelectionOptions& opts);

/// Y = 3 X_1 + 2 X_2 + 1.5 X_4 + e with AR(0.5) predictors and e ~ N(0, sigma^2).
struct GeneratedData {
  Dataset data;
  Vector beta_star;
};
GeneratedData generate_linear_data(std::size_t n, std::size_t d, double sigma, RngSeed seed);

enum class ExperimentMethod { rwpi, glasso_cv, ols };

std::string to_string(ExperimentMethod m);
ExperimentMethod parse_experiment_method(const std::string& text);

struct ExperimentConfig {
  std::size_t n = 350;
  std::size_t d = 50;
  double sigma = 10.0;
  double alpha = 0.05;
  std::size_t reps = 100;
  std::size_t test_size = 10000;
  std::vector<ExperimentMethod> methods{ExperimentMethod::rwpi, ExperimentMethod::glasso_cv,
                                        ExperimentMethod::ols};
  RngSeed seed;
  SelectionMethod method = SelectionMethod::l2;
  Exponent q = Exponent::infinity();
  std::size_t mc_draws = 1000;
  Eigen::Index saa_size = 1000;
  double smoothing_floor = 1e-7;  // L1 continuation floor, relative
  bool scale_response = false;
  std::size_t cv_folds = 10;
  std::size_t cv_grid = 50;
  int threads = 1;
  // CSV experiments
  std::optional<std::string> data;
  std::string response = "y";
  std::size_t train_size = 142;

  void validate() const;
};

/// Flat key=value file; '#' starts a comment.
ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::string& origin = "<memory>");
ExperimentConfig load_experiment_config(const std::string& path);

struct ExperimentRow {
  std::size_t rep = 0;
  ExperimentMethod method = ExperimentMethod::rwpi;
  std::size_t n = 0;
  std::size_t d = 0;
  double lambda = 0.0;
  double train_mse = 0.0;
  double test_mse = 0.0;
  std::optional<double> l1_err;  // absent without a known beta_star
  std::optional<double> l2_err;
  std::optional<bool> coverage_hit;  // RWPI rows of simulated data only
};

struct ExperimentAggregate {
  ExperimentMethod method = ExperimentMethod::rwpi;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t reps = 0;
  double train_mean = 0.0;
  double train_sd = 0.0;
  double test_mean = 0.0;
  double test_sd = 0.0;
  std::optional<double> l1_mean;
  std::optional<double> l2_mean;
  std::optional<double> coverage;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;  // sorted by (rep, method)
  std::vector<ExperimentAggregate> aggregates;
  std::vector<std::string> notes;  // e.g. OLS not applicable
  std::string digest;              // FNV-1a of the rows CSV
};

ExperimentReport run_experiment_sim(const ExperimentConfig& cfg);
ExperimentReport run_experiment_csv(const ExperimentConfig& cfg);
/// Dispatches on cfg.data.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Fraction of rows with coverage_hit == true among rows that carry it.
double coverage_probability(const std::vector<ExperimentRow>& rows);

std::vector<ExperimentAggregate> aggregate(const std::vector<ExperimentRow>& rows);
void write_rows_csv(std::ostream& out, const std::vector<ExperimentRow>& rows);
std::string rows_digest(const std::vector<ExperimentRow>& rows);

}  // namespace rwpi::pipeline
