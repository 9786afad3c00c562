#include "rwpi/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rwpi {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_exponent: return "invalid-exponent";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::degenerate_column: return "degenerate-column";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::kind_mismatch: return "kind-mismatch";
    case ErrorCode::dimension: return "dimension";
    case ErrorCode::unbounded_law: return "unbounded-law";
    case ErrorCode::invalid_factor: return "invalid-factor";
    case ErrorCode::invalid_level: return "invalid-level";
    case ErrorCode::invalid_penalty: return "invalid-penalty";
    case ErrorCode::rank_deficient: return "rank-deficient";
    case ErrorCode::config: return "config";
    case ErrorCode::numeric_bracket: return "numeric-bracket";
    case ErrorCode::parse: return "parse";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

// Exponent -----------------------------------------------------------------

Exponent Exponent::finite(double value) {
  if (std::isnan(value) || value < 1.0) {
    std::ostringstream msg;
    msg << "norm exponent must be >= 1, got " << value;
    throw Error(ErrorCode::invalid_exponent, msg.str());
  }
  if (std::isinf(value)) return infinity();
  return Exponent{value, false};
}

Exponent Exponent::parse(const std::string& text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "inf" || lower == "infinity") return infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::invalid_exponent, "cannot parse exponent '" + text + "'");
  }
  if (used != text.size()) {
    throw Error(ErrorCode::invalid_exponent, "cannot parse exponent '" + text + "'");
  }
  return finite(v);
}

std::string Exponent::to_string() const {
  if (infinite_) return "inf";
  return format_number(value_);
}

Exponent dual_exponent(Exponent q) {
  if (q.is_infinite()) return Exponent::finite(1.0);
  if (q.value() == 1.0) return Exponent::infinity();
  return Exponent::finite(q.value() / (q.value() - 1.0));
}

Exponent dual_exponent(double q) { return dual_exponent(Exponent::finite(q)); }

double lp_norm(std::span<const double> v, Exponent p) {
  if (p.is_infinite()) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  const double e = p.value();
  if (e == 1.0) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  }
  if (e == 2.0) {
    // hypot-style scaling avoids overflow on large entries
    double scale = 0.0;
    for (double x : v) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) return 0.0;
    double s = 0.0;
    for (double x : v) {
      const double t = x / scale;
      s += t * t;
    }
    return scale * std::sqrt(s);
  }
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x) / scale, e);
  return scale * std::pow(s, 1.0 / e);
}

double lp_norm(const Vector& v, Exponent p) {
  return lp_norm(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())), p);
}

std::string to_string(TaskKind kind) {
  return kind == TaskKind::regression ? "regression" : "binary";
}

// Dataset ------------------------------------------------------------------

namespace {

void check_standardized(const Matrix& x) {
  const auto n = x.rows();
  if (n < 2) {
    throw Error(ErrorCode::invalid_argument, "standardized dataset needs at least two rows");
  }
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    const double var = (x.col(j).array() - mean).square().sum() / static_cast<double>(n - 1);
    if (std::abs(mean) > 1e-10 || std::abs(std::sqrt(var) - 1.0) > 1e-10) {
      throw Error(ErrorCode::invalid_argument,
                  "column " + std::to_string(j) + " is flagged standardized but is not");
    }
  }
}

}  // namespace

Dataset::Dataset(Matrix x, Vector y, TaskKind kind, bool standardized,
                 std::vector<std::string> column_names)
    : x_(std::move(x)),
      y_(std::move(y)),
      kind_(kind),
      standardized_(standardized),
      names_(std::move(column_names)) {
  if (x_.rows() != y_.size()) {
    throw Error(ErrorCode::dimension, "predictor rows (" + std::to_string(x_.rows()) +
                                          ") do not match response length (" +
                                          std::to_string(y_.size()) + ")");
  }
  if (!x_.allFinite() || !y_.allFinite()) {
    throw Error(ErrorCode::invalid_argument, "dataset contains non-finite values");
  }
  if (kind_ == TaskKind::binary) {
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
      if (y_[i] != 1.0 && y_[i] != -1.0) {
        throw Error(ErrorCode::invalid_argument,
                    "binary response must be -1 or +1 (row " + std::to_string(i) + ")");
      }
    }
  }
  if (!names_.empty() && static_cast<Eigen::Index>(names_.size()) != x_.cols()) {
    throw Error(ErrorCode::dimension, "column name count does not match predictor count");
  }
  if (standardized_) check_standardized(x_);
}

Dataset Dataset::subset(std::span<const Eigen::Index> rows) const {
  Matrix xs(static_cast<Eigen::Index>(rows.size()), d());
  Vector ys(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto i = rows[k];
    if (i < 0 || i >= n()) throw Error(ErrorCode::dimension, "row index out of range");
    xs.row(static_cast<Eigen::Index>(k)) = x_.row(i);
    ys[static_cast<Eigen::Index>(k)] = y_[i];
  }
  return Dataset(std::move(xs), std::move(ys), kind_, false, names_);
}

ColumnScaling ColumnScaling::fit(const Dataset& ds, bool scale_response) {
  const auto n = ds.n();
  if (n < 2) throw Error(ErrorCode::empty_input, "standardization needs at least two rows");
  ColumnScaling s;
  s.mean = ds.x().colwise().mean().transpose();
  s.sd.resize(ds.d());
  for (Eigen::Index j = 0; j < ds.d(); ++j) {
    const double var =
        (ds.x().col(j).array() - s.mean[j]).square().sum() / static_cast<double>(n - 1);
    // relative test so that a column like (1e6, 1e6, 1e6) is still degenerate
    const double scale = std::max(1.0, std::abs(s.mean[j]));
    if (!(std::sqrt(var) > 1e-13 * scale)) {
      throw Error(ErrorCode::degenerate_column,
                  "column " + std::to_string(j) + " has zero variance");
    }
    s.sd[j] = std::sqrt(var);
  }
  s.scale_response = scale_response && ds.kind() == TaskKind::regression;
  if (s.scale_response) {
    s.y_mean = ds.y().mean();
    const double var = (ds.y().array() - s.y_mean).square().sum() / static_cast<double>(n - 1);
    if (!(var > 0.0)) throw Error(ErrorCode::degenerate_column, "response has zero variance");
    s.y_sd = std::sqrt(var);
  }
  return s;
}

Dataset ColumnScaling::apply(const Dataset& ds) const {
  if (ds.d() != mean.size()) throw Error(ErrorCode::dimension, "scaling width mismatch");
  Matrix x = (ds.x().rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();
  Vector y = ds.y();
  if (ds.kind() == TaskKind::regression) y = (y.array() - y_mean) / y_sd;
  return Dataset(std::move(x), std::move(y), ds.kind(), false, ds.column_names());
}

Dataset standardize(const Dataset& ds, StandardizeOptions opts) {
  const auto scaling = ColumnScaling::fit(ds, opts.scale_response);
  const Dataset scaled = scaling.apply(ds);
  return Dataset(scaled.x(), scaled.y(), ds.kind(), true, ds.column_names());
}

Matrix sample_covariance(const Matrix& rows) {
  if (rows.rows() < 2) throw Error(ErrorCode::empty_input, "covariance needs at least two rows");
  const Matrix centered = rows.rowwise() - rows.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(rows.rows() - 1);
}

Matrix second_moment(const Matrix& rows) {
  if (rows.rows() < 1) throw Error(ErrorCode::empty_input, "second moment of an empty sample");
  return rows.transpose() * rows / static_cast<double>(rows.rows());
}

void CostSpec::validate() const {
  if (!(rho >= 1.0)) throw Error(ErrorCode::invalid_argument, "transport power rho must be >= 1");
}

// Estimating equations -------------------------------------------------------

Vector EstimatingEquation::eval(const Vector& w, const Vector& theta) const {
  if (w.size() != dims.m || theta.size() != dims.l) {
    throw Error(ErrorCode::dimension, "estimating equation argument has wrong dimension");
  }
  Vector out = h(w, theta);
  if (out.size() != dims.r) throw Error(ErrorCode::dimension, "h returned wrong length");
  return out;
}

Matrix EstimatingEquation::jacobian(const Vector& w, const Vector& theta) const {
  if (w.size() != dims.m || theta.size() != dims.l) {
    throw Error(ErrorCode::dimension, "estimating equation argument has wrong dimension");
  }
  Matrix out = dh(w, theta);
  if (out.rows() != dims.r || out.cols() != dims.m) {
    throw Error(ErrorCode::dimension, "Dh returned wrong shape");
  }
  return out;
}

EstimatingEquation EstimatingEquation::mean() {
  EstimatingEquation eq;
  eq.dims = {1, 1, 1};
  eq.h = [](const Vector& w, const Vector& theta) -> Vector { return w - theta; };
  eq.dh = [](const Vector&, const Vector&) -> Matrix { return Matrix::Ones(1, 1); };
  return eq;
}

EstimatingEquation EstimatingEquation::linear_regression(Eigen::Index d) {
  EstimatingEquation eq;
  eq.dims = {d + 1, d, d};
  eq.h = [d](const Vector& w, const Vector& beta) -> Vector {
    const auto x = w.head(d);
    const double resid = w[d] - beta.dot(x);
    return resid * x;
  };
  eq.dh = [d](const Vector& w, const Vector& beta) -> Matrix {
    const auto x = w.head(d);
    const double resid = w[d] - beta.dot(x);
    Matrix j(d, d + 1);
    // d/dx [(y - b.x) x] = (y - b.x) I - x b^T ; d/dy = x
    j.leftCols(d) = resid * Matrix::Identity(d, d) - x * beta.transpose();
    j.col(d) = x;
    return j;
  };
  return eq;
}

EstimatingEquation EstimatingEquation::logistic_regression(Eigen::Index d) {
  EstimatingEquation eq;
  eq.dims = {d + 1, d, d};
  eq.h = [d](const Vector& w, const Vector& beta) -> Vector {
    const auto x = w.head(d);
    const double y = w[d];
    return (-y / (1.0 + std::exp(y * beta.dot(x)))) * x;
  };
  eq.dh = [d](const Vector& w, const Vector& beta) -> Matrix {
    const auto x = w.head(d);
    const double y = w[d];
    const double t = y * beta.dot(x);
    const double s = 1.0 / (1.0 + std::exp(t));  // sigma(-t)
    const double ds_dt = -s * (1.0 - s);
    Matrix j(d, d + 1);
    j.leftCols(d) = -y * s * Matrix::Identity(d, d) - (y * ds_dt * y) * x * beta.transpose();
    j.col(d) = -s * x - y * ds_dt * beta.dot(x) * x;
    return j;
  };
  return eq;
}

double jacobian_consistency(const EstimatingEquation& eq, const Vector& w, const Vector& theta,
                            double step) {
  const Matrix analytic = eq.jacobian(w, theta);
  Matrix numeric(eq.dims.r, eq.dims.m);
  for (Eigen::Index k = 0; k < eq.dims.m; ++k) {
    const double hk = step * std::max(1.0, std::abs(w[k]));
    Vector wp = w, wm = w;
    wp[k] += hk;
    wm[k] -= hk;
    numeric.col(k) = (eq.eval(wp, theta) - eq.eval(wm, theta)) / (2.0 * hk);
  }
  const double scale = std::max(1.0, analytic.cwiseAbs().maxCoeff());
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

}  // namespace rwpi
