#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rwpi/limit_laws.hpp"
#include "rwpi/pipeline.hpp"

using namespace rwpi;
using namespace rwpi::pipeline;

namespace {

constexpr double kChiSq95 = 3.841458820694124;  // chi-square(1) 0.95 quantile
constexpr double kHalfNormal95 = 1.959963984540054;

ExperimentConfig small_sim() {
  ExperimentConfig c;
  c.n = 60;
  c.d = 8;
  c.reps = 3;
  c.test_size = 200;
  c.mc_draws = 200;
  c.cv_grid = 10;
  c.cv_folds = 5;
  c.seed = RngSeed{123};
  return c;
}

}  // namespace

TEST(SelectLambda, HighdimDelegates) {
  SelectionOptions o;
  const auto c = select_lambda_linear(SelectionMethod::highdim, 10000, 300, {}, o);
  EXPECT_EQ(c.lambda, limits::lambda_highdim(10000, 300, 0.05));
  EXPECT_NEAR(c.delta, c.lambda * c.lambda, 1e-15);
  EXPECT_NEAR(c.eta_hat, 10000 * c.delta, 1e-9);
}

TEST(SelectLambda, L2MatchesScaledChiSquareQuantile) {
  SelectionOptions o;
  o.q = Exponent::finite(2.0);
  o.mc_draws = 40000;
  o.seed = RngSeed{5};
  LinearSelectionInput in;
  in.factor = limits::CovarianceFactor::identity(1);
  const auto c = select_lambda_linear(SelectionMethod::l2, 100, 1, in, o);
  const double expected = limits::normal_error_factor() * kChiSq95;
  EXPECT_NEAR(c.eta_hat, expected, 0.03 * expected);
  EXPECT_NEAR(c.lambda, std::sqrt(c.eta_hat / 100.0), 1e-15);
  EXPECT_NEAR(c.delta, c.lambda * c.lambda, 1e-15);
}

TEST(SelectLambda, Errors) {
  SelectionOptions o;
  o.mc_draws = 0;
  LinearSelectionInput in;
  in.factor = limits::CovarianceFactor::identity(2);
  try {
    (void)select_lambda_linear(SelectionMethod::l2, 10, 2, in, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config);
  }
  o.mc_draws = 10;
  EXPECT_THROW((void)select_lambda_linear(SelectionMethod::l1, 10, 2, in, o), Error);
  o.alpha = 1.5;
  EXPECT_THROW((void)select_lambda_linear(SelectionMethod::l2, 10, 2, in, o), Error);
}

TEST(SelectLambda, LargerAlphaNeverIncreasesLambda) {
  LinearSelectionInput in;
  in.factor = limits::CovarianceFactor::autoregressive(5, 0.5);
  double prev = std::numeric_limits<double>::infinity();
  for (double alpha : {0.01, 0.05, 0.1, 0.3, 0.6}) {
    SelectionOptions o;
    o.alpha = alpha;
    o.mc_draws = 500;
    o.seed = RngSeed{8};
    const double l = select_lambda_linear(SelectionMethod::l2, 50, 5, in, o).lambda;
    EXPECT_LE(l, prev);
    prev = l;
  }
}

TEST(SelectLambdaLogistic, HalfNormalQuantile) {
  Matrix x(4, 1);
  x << 1, -1, 1, -1;  // second moment 1
  const Dataset ds(x, (Vector(4) << 1, -1, -1, 1).finished(), TaskKind::binary);
  SelectionOptions o;
  o.q = Exponent::finite(2.0);
  o.mc_draws = 40000;
  o.seed = RngSeed{6};
  const auto c = select_lambda_logistic(ds, o);
  EXPECT_NEAR(c.eta_hat, kHalfNormal95, 0.03 * kHalfNormal95);
  EXPECT_NEAR(c.lambda, c.eta_hat / 2.0, 1e-15);
  EXPECT_EQ(c.lambda, c.delta);
  o.alpha = 0.999;
  EXPECT_LT(select_lambda_logistic(ds, o).lambda, 0.01);
  const Dataset reg(x, Vector::Zero(4), TaskKind::regression);
  try {
    (void)select_lambda_logistic(reg, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kind_mismatch);
  }
}

TEST(RegularizationChoice, AlgebraChecked) {
  RegularizationChoice c;
  c.lambda = 0.3;
  c.delta = 0.09;
  EXPECT_NO_THROW(c.validate());
  c.delta = 0.3;
  EXPECT_THROW(c.validate(), Error);
  c.method = SelectionMethod::l4;
  EXPECT_NO_THROW(c.validate());
}

TEST(GenerateLinearData, CoefficientsAndDeterminism) {
  const auto g = generate_linear_data(10, 6, 10.0, RngSeed{1});
  EXPECT_EQ(g.beta_star, (Vector(6) << 3, 2, 0, 1.5, 0, 0).finished());
  const auto h = generate_linear_data(10, 6, 10.0, RngSeed{1});
  EXPECT_EQ(g.data.x(), h.data.x());
  EXPECT_EQ(g.data.y(), h.data.y());
  EXPECT_THROW((void)generate_linear_data(10, 3, 1.0, RngSeed{1}), Error);
}

TEST(GenerateLinearData, AutoregressiveCovariance) {
  const auto g = generate_linear_data(100000, 5, 1.0, RngSeed{2});
  const Matrix s = sample_covariance(g.data.x());
  EXPECT_NEAR(s(0, 1), 0.5, 0.02);
  EXPECT_NEAR(s(0, 2), 0.25, 0.02);
  EXPECT_NEAR(s(3, 3), 1.0, 0.02);
}

TEST(Experiment, RowsAndAggregates) {
  const auto rep = run_experiment_sim(small_sim());
  ASSERT_EQ(rep.rows.size(), 9u);
  for (const auto& r : rep.rows) {
    EXPECT_GE(r.train_mse, 0.0);
    EXPECT_GE(r.test_mse, 0.0);
    ASSERT_TRUE(r.l1_err.has_value());
    EXPECT_GE(*r.l1_err, 0.0);
    EXPECT_EQ(r.coverage_hit.has_value(), r.method == ExperimentMethod::rwpi);
  }
  ASSERT_EQ(rep.aggregates.size(), 3u);
  EXPECT_TRUE(rep.aggregates[0].coverage.has_value());
  EXPECT_EQ(rep.digest.size(), 16u);
}

TEST(Experiment, DigestIndependentOfThreads) {
  auto cfg = small_sim();
  const auto a = run_experiment_sim(cfg);
  cfg.threads = 4;
  const auto b = run_experiment_sim(cfg);
  EXPECT_EQ(a.digest, b.digest);
  std::ostringstream ca, cb;
  write_rows_csv(ca, a.rows);
  write_rows_csv(cb, b.rows);
  EXPECT_EQ(ca.str(), cb.str());
}

TEST(Experiment, NoiselessOlsInterpolates) {
  auto cfg = small_sim();
  cfg.sigma = 0.0;
  cfg.methods = {ExperimentMethod::ols};
  const auto rep = run_experiment_sim(cfg);
  for (const auto& r : rep.rows) EXPECT_LT(r.train_mse, 1e-20);
}

TEST(Experiment, OlsSkippedWhenUnderdetermined) {
  auto cfg = small_sim();
  cfg.n = 10;
  cfg.d = 20;
  cfg.reps = 1;
  cfg.methods = {ExperimentMethod::rwpi, ExperimentMethod::ols};
  const auto rep = run_experiment_sim(cfg);
  for (const auto& r : rep.rows) EXPECT_NE(r.method, ExperimentMethod::ols);
  EXPECT_FALSE(rep.notes.empty());
}

TEST(Experiment, CsvSplitsAndValidates) {
  const auto path = std::filesystem::temp_directory_path() / "rwpi_pipeline_csv.csv";
  const auto g = generate_linear_data(40, 5, 1.0, RngSeed{4});
  write_dataset_csv(path.string(), g.data);
  ExperimentConfig cfg;
  cfg.data = path.string();
  cfg.train_size = 25;
  cfg.reps = 1;
  cfg.mc_draws = 100;
  cfg.cv_folds = 5;
  cfg.cv_grid = 5;
  cfg.seed = RngSeed{3};
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  EXPECT_EQ(a.digest, b.digest);
  for (const auto& r : a.rows) {
    EXPECT_FALSE(r.coverage_hit.has_value());
    EXPECT_FALSE(r.l1_err.has_value());
  }
  cfg.train_size = 40;
  try {
    (void)run_experiment(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config);
  }
  std::filesystem::remove(path);
}

TEST(CoverageProbability, Fractions) {
  std::vector<ExperimentRow> rows(4);
  for (auto& r : rows) r.coverage_hit = true;
  EXPECT_EQ(coverage_probability(rows), 1.0);
  for (auto& r : rows) r.coverage_hit = false;
  EXPECT_EQ(coverage_probability(rows), 0.0);
  rows[1].coverage_hit = true;
  EXPECT_EQ(coverage_probability(rows), 0.25);
  EXPECT_THROW((void)coverage_probability({}), Error);
}

TEST(Config, ParsesKeysAndReportsErrors) {
  const auto cfg = parse_experiment_config("n = 100\nd=10 # comment\nmethods = RWPI, OLS\nq=inf\nmethod=highdim\n");
  EXPECT_EQ(cfg.n, 100u);
  EXPECT_EQ(cfg.d, 10u);
  EXPECT_EQ(cfg.methods.size(), 2u);
  EXPECT_EQ(cfg.method, SelectionMethod::highdim);
  try {
    (void)parse_experiment_config("n=5\nbogus=1\n", "cfg.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config);
    EXPECT_NE(std::string(e.what()).find("cfg.txt:2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
  EXPECT_THROW((void)parse_experiment_config("n=abc\n"), Error);
  EXPECT_THROW((void)parse_experiment_config("just text\n"), Error);
}
