#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rwpi/error.hpp"

namespace rwpi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Norm exponent in [1, inf]. Infinity is a distinct state, never a large
/// finite number, so every norm routine branches on `is_infinite()`.
class Exponent {
 public:
  /// Throws ErrorCode::invalid_exponent when value < 1 or NaN. Passing
  /// +inf yields the infinite exponent.
  static Exponent finite(double value);
  static Exponent infinity() noexcept { return Exponent{0.0, true}; }
  /// Accepts "inf", "infinity" or a decimal number.
  static Exponent parse(const std::string& text);

  [[nodiscard]] bool is_infinite() const noexcept { return infinite_; }
  /// Finite value; +inf when infinite.
  [[nodiscard]] double value() const noexcept {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const Exponent& a, const Exponent& b) noexcept {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }

 private:
  Exponent(double v, bool inf) noexcept : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

/// Hölder conjugate p of q, 1/p + 1/q = 1.
Exponent dual_exponent(Exponent q);
/// Hölder conjugate for a raw double; q < 1 raises invalid_exponent.
Exponent dual_exponent(double q);

double lp_norm(std::span<const double> v, Exponent p);
double lp_norm(const Vector& v, Exponent p);

enum class TaskKind { regression, binary };

std::string to_string(TaskKind kind);

/// Training data: predictor rows and a response vector.
class Dataset {
 public:
  /// Validates shape, finiteness and binary labels. When `standardized` is
  /// set the column moments are checked as well.
  Dataset(Matrix x, Vector y, TaskKind kind, bool standardized = false,
          std::vector<std::string> column_names = {});

  [[nodiscard]] const Matrix& x() const noexcept { return x_; }
  [[nodiscard]] const Vector& y() const noexcept { return y_; }
  [[nodiscard]] TaskKind kind() const noexcept { return kind_; }
  [[nodiscard]] bool standardized() const noexcept { return standardized_; }
  [[nodiscard]] Eigen::Index n() const noexcept { return x_.rows(); }
  [[nodiscard]] Eigen::Index d() const noexcept { return x_.cols(); }
  [[nodiscard]] const std::vector<std::string>& column_names() const noexcept {
    return names_;
  }

  /// Rows selected by index, in the given order.
  [[nodiscard]] Dataset subset(std::span<const Eigen::Index> rows) const;

 private:
  Matrix x_;
  Vector y_;
  TaskKind kind_;
  bool standardized_;
  std::vector<std::string> names_;
};

/// Column location/scale estimated on one dataset and reusable on another
/// (training statistics applied to test data). A regression response is
/// mapped to (y - y_mean) / y_sd; fit() sets both only with scale_response,
/// callers may set y_mean alone to center without scaling.
struct ColumnScaling {
  Vector mean;
  Vector sd;
  bool scale_response = false;
  double y_mean = 0.0;
  double y_sd = 1.0;

  static ColumnScaling fit(const Dataset& ds, bool scale_response = false);
  [[nodiscard]] Dataset apply(const Dataset& ds) const;
};

struct StandardizeOptions {
  /// Also center and scale y (regression only; binary labels never change).
  bool scale_response = false;
};

/// Centers each predictor column and divides by its sample standard
/// deviation (divisor n-1). Constant columns raise degenerate_column.
Dataset standardize(const Dataset& ds, StandardizeOptions opts = {});

/// Sample covariance (divisor n-1) of the rows of `rows`.
Matrix sample_covariance(const Matrix& rows);
/// Uncentered second moment (1/n) sum x_i x_i^T.
Matrix second_moment(const Matrix& rows);

/// Transport cost ||u - w||_q^rho, optionally forbidding movement of the
/// response coordinate (the last coordinate of W).
struct CostSpec {
  Exponent q = Exponent::finite(2.0);
  double rho = 2.0;
  bool modified = false;

  /// Throws invalid_argument when rho < 1.
  void validate() const;
  [[nodiscard]] Exponent dual() const { return dual_exponent(q); }
};

struct EquationDims {
  Eigen::Index m = 0;  // dimension of W
  Eigen::Index l = 0;  // dimension of theta
  Eigen::Index r = 0;  // number of moment equations
};

/// Estimating equation E[h(W, theta)] = 0 together with the derivative of h
/// with respect to w (an r x m matrix).
struct EstimatingEquation {
  std::function<Vector(const Vector& w, const Vector& theta)> h;
  std::function<Matrix(const Vector& w, const Vector& theta)> dh;
  EquationDims dims;

  /// Evaluates h and checks its length against dims.r.
  [[nodiscard]] Vector eval(const Vector& w, const Vector& theta) const;
  /// Evaluates Dh and checks its shape against (r, m).
  [[nodiscard]] Matrix jacobian(const Vector& w, const Vector& theta) const;

  /// h(w, theta) = w - theta with m = l = r = 1.
  static EstimatingEquation mean();
  /// h((x, y), beta) = (y - beta^T x) x for d predictors; W = (x, y).
  static EstimatingEquation linear_regression(Eigen::Index d);
  /// h((x, y), beta) = -y x / (1 + exp(y beta^T x)); W = (x, y).
  static EstimatingEquation logistic_regression(Eigen::Index d);
};

/// Largest relative disagreement between Dh and a central finite difference
/// of h at (w, theta).
double jacobian_consistency(const EstimatingEquation& eq, const Vector& w,
                            const Vector& theta, double step = 1e-6);

/// Master seed with order-independent substreams.
///
/// stream_seed(i) = splitmix64(master ^ splitmix64(i + 0x9E3779B97F4A7C15)),
/// where splitmix64(x) is one step of Steele, Lea and Flood's SplitMix64
/// generator from state x (increment, then finalizer).
/// Substream i therefore depends only on (master, i), never on how many
/// other substreams were consumed first or on which thread.
struct RngSeed {
  std::uint64_t master = 0;

  [[nodiscard]] std::uint64_t stream_seed(std::uint64_t index) const noexcept;
  [[nodiscard]] std::mt19937_64 stream(std::uint64_t index) const;
  /// Seed object for a nested experiment (e.g. one replication).
  [[nodiscard]] RngSeed child(std::uint64_t index) const noexcept {
    return RngSeed{stream_seed(index)};
  }
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Fills `out` with i.i.d. standard normal draws from `gen`.
void fill_standard_normal(std::mt19937_64& gen, Eigen::Ref<Vector> out);

// CSV ingestion ------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;  // rows x header.size()
};

/// Parses a header-first CSV of numeric cells. Quoted fields follow the
/// RFC 4180 rules (doubled quotes, embedded separators). Errors name the
/// 1-based line number.
CsvTable read_csv_table(const std::string& path);
CsvTable parse_csv_table(const std::string& text, const std::string& origin = "<memory>");

/// Loads a dataset, taking `response_column` as y and every other column
/// as a predictor.
Dataset read_dataset_csv(const std::string& path,
                         const std::string& response_column, TaskKind kind);

/// Writes predictors as x1..xd plus a trailing `y` column.
void write_dataset_csv(const std::string& path, const Dataset& ds);

/// Formats a double with 12 significant digits (shortest round-trip form of
/// the 12-digit value).
std::string format_number(double v);

}  // namespace rwpi
