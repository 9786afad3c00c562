#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rwpi/dro.hpp"

using namespace rwpi;
using namespace rwpi::dro;

namespace {

// y = x beta0 + noise scaled so that MSE at beta0 equals `mse` exactly
Dataset with_mse(const Vector& beta, double mse, std::uint64_t seed, int n = 30) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  const auto d = beta.size();
  Matrix x(n, d);
  Vector r(n);
  for (int i = 0; i < n; ++i) {
    r[i] = nd(gen);
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = nd(gen);
  }
  r *= std::sqrt(mse * n) / r.norm();
  return Dataset(x, x * beta + r, TaskKind::regression);
}

Dataset binary(const Matrix& x, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Vector y(x.rows());
  for (auto& v : y) v = (gen() & 1) != 0u ? 1.0 : -1.0;
  return Dataset(x, y, TaskKind::binary);
}

}  // namespace

TEST(LinearClosed, Examples) {
  const Vector beta = (Vector(2) << 1.5, -0.5).finished();
  const auto ds = with_mse(beta, 4.0, 1);
  EXPECT_NEAR(worstcase_linear_closed(ds, beta, 0.0, Exponent::finite(1.0)).value, 4.0, 1e-12);
  EXPECT_NEAR(worstcase_linear_closed(ds, beta, 0.25, Exponent::finite(1.0)).value, 9.0, 1e-12);
  EXPECT_NEAR(worstcase_dual_numeric(ds, beta, 0.25, Exponent::finite(1.0)).value, 9.0, 9e-6);
  // barbeta (-beta, 1) under p = inf has norm 1.5
  EXPECT_NEAR(worstcase_linear_closed(ds, beta, 0.25, Exponent::infinity(), true).value, std::pow(2.0 + 0.75, 2),
              1e-12);
  EXPECT_THROW((void)worstcase_linear_closed(ds, beta, -1.0, Exponent::finite(1.0)), Error);
}

TEST(LinearClosed, MonotoneAndQuadraticInRootDelta) {
  const Vector beta = (Vector(3) << 1, 0, -2).finished();
  const auto ds = with_mse(beta, 2.0, 3);
  double prev = 0.0;
  for (double s : {0.0, 0.1, 0.5, 1.0, 2.0}) {
    const double v = worstcase_linear_closed(ds, beta, s * s, Exponent::finite(2.0)).value;
    EXPECT_GE(v, prev);
    EXPECT_GE(v, mean_squared_error(ds, beta) - 1e-12);
    EXPECT_NEAR(std::sqrt(v), std::sqrt(2.0) + s * std::sqrt(5.0), 1e-12);
    prev = v;
  }
}

TEST(DualNumeric, MatchesClosedOnRandomInstances) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> unif(0.01, 4.0);
  std::normal_distribution<double> nd;
  const Exponent ps[] = {Exponent::finite(1.0), Exponent::finite(2.0), Exponent::infinity()};
  for (int k = 0; k < 100; ++k) {
    const int d = 1 + k % 6;
    Vector beta(d);
    for (auto& v : beta) v = nd(gen);
    const auto ds = with_mse(beta, unif(gen), 100 + k, 10 + k % 20);
    const Vector b2 = beta + 0.1 * Vector::Ones(d);
    const double delta = unif(gen);
    const auto p = ps[k % 3];
    for (bool bar : {false, true}) {
      const auto closed = worstcase_linear_closed(ds, b2, delta, p, bar);
      const auto dual = worstcase_dual_numeric(ds, b2, delta, p, bar);
      ASSERT_TRUE(dual.gamma.has_value());
      EXPECT_EQ(dual.form, WorstCaseForm::dual_numeric);
      EXPECT_LE(std::abs(dual.value - closed.value), 1e-6 * (1.0 + closed.value)) << k;
      const double vn = lp_norm(bar ? Vector((Vector(d + 1) << -b2, 1).finished()) : b2, p);
      EXPECT_NEAR(linear_dual_objective(*dual.gamma, delta, vn * vn, mean_squared_error(ds, b2)), dual.value,
                  1e-9 * (1.0 + dual.value));
    }
  }
}

TEST(DualNumeric, ZeroMseAndLargeDelta) {
  const Vector beta = (Vector(2) << 1, 2).finished();
  const auto ds = with_mse(beta, 0.0, 4);
  EXPECT_NEAR(worstcase_dual_numeric(ds, beta, 0.3, Exponent::finite(2.0)).value, 0.3 * 5.0, 1e-8);
  const auto noisy = with_mse(beta, 1.0, 5);
  const double big = 1e8;
  EXPECT_NEAR(worstcase_dual_numeric(noisy, beta, big, Exponent::finite(2.0)).value / big, 5.0, 1e-3);
  EXPECT_NEAR(worstcase_dual_numeric(noisy, beta, 0.0, Exponent::finite(2.0)).value, 1.0, 1e-12);
}

TEST(LogisticClosed, Examples) {
  Matrix x(4, 2);
  x << 1, 2, -1, 0.5, 0.3, -2, 2, 1;
  const auto ds = binary(x, 2);
  EXPECT_NEAR(worstcase_logistic_closed(ds, Vector::Zero(2), 0.7, Exponent::finite(1.0)).value, std::log(2.0),
              1e-15);
  const Vector beta = (Vector(2) << 1, -2).finished();
  const double emp = logistic_loss(ds, beta);
  EXPECT_NEAR(worstcase_logistic_closed(ds, beta, 0.0, Exponent::finite(1.0)).value, emp, 1e-15);
  EXPECT_NEAR(worstcase_logistic_closed(ds, beta, 0.1, Exponent::finite(1.0)).value, emp + 0.3, 1e-14);
  const Dataset reg(x, Vector::Zero(4), TaskKind::regression);
  EXPECT_THROW((void)worstcase_logistic_closed(reg, beta, 0.1, Exponent::finite(1.0)), Error);
}

TEST(HingeClosed, Examples) {
  Matrix x(3, 2);
  x << 2, 0, 0, -3, 1.5, 1;
  const Vector y = (Vector(3) << 1, -1, 1).finished();
  const Dataset ds(x, y, TaskKind::binary);
  EXPECT_NEAR(worstcase_hinge_closed(ds, Vector::Zero(2), 0.4, Exponent::finite(2.0)).value, 1.0, 1e-15);
  const Vector beta = (Vector(2) << 0.6, 0.8).finished();  // margins 1.2, 2.4, 1.7
  EXPECT_NEAR(hinge_loss(ds, beta), 0.0, 1e-15);
  EXPECT_NEAR(worstcase_hinge_closed(ds, beta, 0.2, Exponent::finite(2.0)).value, 0.2, 1e-15);
  EXPECT_NEAR(worstcase_hinge_closed(ds, beta, 0.0, Exponent::finite(2.0)).value, hinge_loss(ds, beta), 1e-15);
}
