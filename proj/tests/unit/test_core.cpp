#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "rwpi/core.hpp"

using namespace rwpi;

namespace {

Dataset regression(Matrix x, Vector y) { return Dataset(std::move(x), std::move(y), TaskKind::regression); }

}  // namespace

TEST(DualExponent, ConjugatePairs) {
  EXPECT_EQ(dual_exponent(Exponent::finite(2.0)), Exponent::finite(2.0));
  EXPECT_TRUE(dual_exponent(Exponent::infinity()) == Exponent::finite(1.0));
  EXPECT_TRUE(dual_exponent(Exponent::finite(1.0)).is_infinite());
  EXPECT_NEAR(dual_exponent(3.0).value(), 1.5, 1e-15);
}

TEST(DualExponent, Involution) {
  for (double q : {1.0, 1.25, 1.5, 2.0, 3.0, 7.5}) {
    const auto back = dual_exponent(dual_exponent(Exponent::finite(q)));
    EXPECT_NEAR(back.value(), q, 1e-12) << q;
  }
  EXPECT_TRUE(dual_exponent(dual_exponent(Exponent::infinity())).is_infinite());
}

TEST(DualExponent, RejectsBelowOne) {
  try {
    (void)dual_exponent(0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_exponent);
  }
  EXPECT_THROW((void)Exponent::finite(std::nan("")), Error);
}

TEST(Exponent, ParseAndPrint) {
  EXPECT_TRUE(Exponent::parse("inf").is_infinite());
  EXPECT_TRUE(Exponent::parse("infinity").is_infinite());
  EXPECT_EQ(Exponent::parse("2").value(), 2.0);
  EXPECT_EQ(Exponent::infinity().to_string(), "inf");
  EXPECT_THROW((void)Exponent::parse("abc"), Error);
}

TEST(LpNorm, Examples) {
  const Vector v = (Vector(2) << 3, -4).finished();
  EXPECT_DOUBLE_EQ(lp_norm(v, Exponent::finite(2.0)), 5.0);
  EXPECT_DOUBLE_EQ(lp_norm(v, Exponent::infinity()), 4.0);
  EXPECT_DOUBLE_EQ(lp_norm(Vector::Ones(3), Exponent::finite(1.0)), 3.0);
  EXPECT_EQ(lp_norm(Vector::Zero(4), Exponent::finite(1.7)), 0.0);
}

TEST(LpNorm, HolderInequality) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  for (double q : {1.0, 1.5, 2.0, 4.0}) {
    const auto qe = Exponent::finite(q);
    const auto pe = dual_exponent(qe);
    for (int k = 0; k < 50; ++k) {
      Vector u(6), v(6);
      for (int j = 0; j < 6; ++j) {
        u[j] = nd(gen);
        v[j] = nd(gen);
      }
      EXPECT_LE(std::abs(u.dot(v)), lp_norm(u, pe) * lp_norm(v, qe) * (1 + 1e-12));
    }
  }
}

TEST(Dataset, Invariants) {
  EXPECT_THROW(regression(Matrix::Zero(3, 2), Vector::Zero(2)), Error);
  Matrix x = Matrix::Zero(2, 1);
  x(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(regression(x, Vector::Zero(2)), Error);
  EXPECT_THROW(Dataset(Matrix::Zero(2, 1), (Vector(2) << 1, 0).finished(), TaskKind::binary), Error);
  EXPECT_NO_THROW(Dataset(Matrix::Zero(2, 1), (Vector(2) << 1, -1).finished(), TaskKind::binary));
  EXPECT_THROW(Dataset(Matrix::Ones(3, 1), Vector::Zero(3), TaskKind::regression, true), Error);
}

TEST(Standardize, CentersAndScales) {
  Matrix x(3, 1);
  x << 1, 2, 3;
  const auto out = standardize(regression(x, Vector::Zero(3)));
  EXPECT_TRUE(out.standardized());
  EXPECT_NEAR(out.x()(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(out.x()(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(out.x()(2, 0), 1.0, 1e-15);
}

TEST(Standardize, Idempotent) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd(2.0, 5.0);
  Matrix x(20, 4);
  Vector y(20);
  for (int i = 0; i < 20; ++i) {
    y[i] = nd(gen);
    for (int j = 0; j < 4; ++j) x(i, j) = nd(gen);
  }
  const auto once = standardize(regression(x, y));
  const auto twice = standardize(once);
  EXPECT_LT((once.x() - twice.x()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(once.y(), y);
  const auto scaled = standardize(regression(x, y), {.scale_response = true});
  EXPECT_NEAR(scaled.y().mean(), 0.0, 1e-12);
}

TEST(Standardize, BinaryLabelsUnchanged) {
  Matrix x(4, 1);
  x << 1, 2, 3, 5;
  const Vector y = (Vector(4) << 1, -1, 1, -1).finished();
  const auto out = standardize(Dataset(x, y, TaskKind::binary), {.scale_response = true});
  EXPECT_EQ(out.y(), y);
}

TEST(Standardize, DegenerateColumnNamed) {
  Matrix x(3, 2);
  x << 1, 5, 2, 5, 3, 5;
  try {
    (void)standardize(regression(x, Vector::Zero(3)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_column);
    EXPECT_NE(std::string(e.what()).find('1'), std::string::npos);
  }
}

TEST(ColumnScaling, TrainStatisticsApplyToTest) {
  Matrix x(3, 1);
  x << 1, 2, 3;
  const auto s = ColumnScaling::fit(regression(x, Vector::Zero(3)));
  Matrix t(1, 1);
  t << 4;
  EXPECT_NEAR(s.apply(regression(t, Vector::Zero(1))).x()(0, 0), 2.0, 1e-15);
}

TEST(RngSeed, StreamsDependOnlyOnIndex) {
  const RngSeed s{42};
  auto a = s.stream(5);
  auto b0 = s.stream(0);
  (void)b0();
  auto b = s.stream(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
  EXPECT_NE(s.stream_seed(1), s.stream_seed(2));
  EXPECT_NE(RngSeed{1}.stream_seed(0), RngSeed{2}.stream_seed(0));
  EXPECT_EQ(s.child(3).master, s.stream_seed(3));
}

TEST(RngSeed, SplitMixReferenceValue) {
  // first two outputs of the reference SplitMix64 generator seeded with 0
  EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(splitmix64(0x9E3779B97F4A7C15ULL), 0x6E789E6AA1B965F4ULL);
}

TEST(EstimatingEquation, JacobiansMatchFiniteDifferences) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> nd;
  for (const auto& eq : {EstimatingEquation::mean(), EstimatingEquation::linear_regression(3),
                         EstimatingEquation::logistic_regression(3)}) {
    for (int k = 0; k < 20; ++k) {
      Vector w(eq.dims.m), th(eq.dims.l);
      for (auto& v : w) v = nd(gen);
      for (auto& v : th) v = nd(gen);
      if (eq.dims.m == 4 && k % 2 == 0) w[3] = 1.0;
      EXPECT_LT(jacobian_consistency(eq, w, th), 1e-5);
    }
  }
}

TEST(EstimatingEquation, DimensionChecked) {
  auto eq = EstimatingEquation::mean();
  eq.h = [](const Vector&, const Vector&) { return Vector::Zero(2).eval(); };
  EXPECT_THROW((void)eq.eval(Vector::Zero(1), Vector::Zero(1)), Error);
}

TEST(Csv, ParsesQuotedFieldsAndReportsLines) {
  const auto t = parse_csv_table("a,\"b,c\",y\n1,2,3\n\"4\",5,6\n");
  ASSERT_EQ(t.header.size(), 3u);
  EXPECT_EQ(t.header[1], "b,c");
  EXPECT_EQ(t.values(1, 0), 4.0);
  try {
    (void)parse_csv_table("a,y\n1,2\n3,x\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse);
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
  }
}

TEST(Csv, DatasetRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "rwpi_core_roundtrip.csv";
  Matrix x(2, 2);
  x << 1.5, -2, 0.25, 1e-3;
  const Vector y = (Vector(2) << 3, 4).finished();
  write_dataset_csv(path.string(), regression(x, y));
  const auto back = read_dataset_csv(path.string(), "y", TaskKind::regression);
  EXPECT_EQ(back.x(), x);
  EXPECT_EQ(back.y(), y);
  EXPECT_THROW((void)read_dataset_csv(path.string(), "missing", TaskKind::regression), Error);
  std::filesystem::remove(path);
}

TEST(FormatNumber, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(2.0), "2");
}
