#include "rwpi/limit_laws.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <ostream>

#include <boost/math/distributions/normal.hpp>

#include "optim.hpp"
#include "rwpi/parallel.hpp"

namespace rwpi::limits {

std::string to_string(LimitLaw law) {
  switch (law) {
    case LimitLaw::rbar_rho: return "RBAR_RHO";
    case LimitLaw::rbar_one: return "RBAR_1";
    case LimitLaw::l1: return "L1";
    case LimitLaw::l2: return "L2";
    case LimitLaw::l4: return "L4";
  }
  return "unknown";
}

LimitLaw parse_law(const std::string& name) {
  if (name == "rbar" || name == "RBAR_RHO") return LimitLaw::rbar_rho;
  if (name == "rbar1" || name == "RBAR_1") return LimitLaw::rbar_one;
  if (name == "l1" || name == "L1") return LimitLaw::l1;
  if (name == "l2" || name == "L2") return LimitLaw::l2;
  if (name == "l4" || name == "L4") return LimitLaw::l4;
  throw Error(ErrorCode::invalid_argument, "unknown limit law '" + name + "'");
}

// Covariance factors -----------------------------------------------------------

CovarianceFactor CovarianceFactor::from_covariance(const Matrix& sigma, std::string id) {
  if (sigma.rows() != sigma.cols()) throw Error(ErrorCode::dimension, "covariance must be square");
  if (!sigma.allFinite()) throw Error(ErrorCode::invalid_argument, "covariance is not finite");
  const Matrix sym = 0.5 * (sigma + sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  Vector ev = eig.eigenvalues();
  const double top = ev.size() > 0 ? std::max(0.0, ev.maxCoeff()) : 0.0;
  const double floor = 1e-12 * std::max(1.0, top);
  for (Eigen::Index k = 0; k < ev.size(); ++k) ev[k] = ev[k] > floor ? std::sqrt(ev[k]) : 0.0;
  Matrix root = eig.eigenvectors() * ev.asDiagonal();
  return CovarianceFactor(std::move(root), std::move(id));
}

CovarianceFactor CovarianceFactor::autoregressive(Eigen::Index d, double rho) {
  if (d < 1) throw Error(ErrorCode::dimension, "dimension must be positive");
  if (!(std::abs(rho) < 1.0)) throw Error(ErrorCode::invalid_argument, "AR coefficient must be in (-1, 1)");
  // X_1 = z_1, X_k = rho X_{k-1} + sqrt(1 - rho^2) z_k  =>  L_{kj} = rho^{k-j} c_j
  Matrix root = Matrix::Zero(d, d);
  const double innov = std::sqrt(1.0 - rho * rho);
  for (Eigen::Index j = 0; j < d; ++j) {
    double v = j == 0 ? 1.0 : innov;
    for (Eigen::Index k = j; k < d; ++k) {
      root(k, j) = v;
      v *= rho;
    }
  }
  return CovarianceFactor(std::move(root), "ar(" + format_number(rho) + "),d=" + std::to_string(d));
}

CovarianceFactor CovarianceFactor::identity(Eigen::Index d) {
  return CovarianceFactor(Matrix::Identity(d, d), "identity,d=" + std::to_string(d));
}

Vector CovarianceFactor::draw(std::mt19937_64& gen) const {
  Vector z(root_.cols());
  fill_standard_normal(gen, z);
  return root_ * z;
}

// Smoothed norms -----------------------------------------------------------------

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool smooth_exponent(Exponent p) { return !p.is_infinite() && p.value() > 1.0; }

// Column norms ||V_i||_p, or smooth upper approximations within O(mu) for
// p in {1, inf}. Fills G with the column gradients when requested.
Eigen::ArrayXd column_norms(const Matrix& v, Exponent p, double mu, Matrix* g) {
  const auto cols = v.cols();
  Eigen::ArrayXd out(cols);
  if (g != nullptr) g->resize(v.rows(), cols);
  if (mu <= 0.0 || smooth_exponent(p)) {
    for (Eigen::Index i = 0; i < cols; ++i) {
      const auto col = v.col(i);
      const double n = p.is_infinite() ? col.cwiseAbs().maxCoeff()
                       : p.value() == 1.0 ? col.cwiseAbs().sum()
                       : p.value() == 2.0 ? col.norm()
                                          : lp_norm(Vector(col), p);
      out[i] = n;
      if (g == nullptr) continue;
      auto gc = g->col(i);
      gc.setZero();
      if (n <= 0.0) continue;
      if (p.is_infinite()) {
        Eigen::Index j = 0;
        col.cwiseAbs().maxCoeff(&j);
        gc[j] = col[j] > 0 ? 1.0 : -1.0;
      } else if (p.value() == 1.0) {
        gc = col.array().sign().matrix();
      } else if (p.value() == 2.0) {
        gc = col / n;
      } else {
        const double e = p.value() - 1.0;
        gc = (col.array().abs() / n).pow(e).matrix().cwiseProduct(col.array().sign().matrix());
      }
    }
    return out;
  }
  if (p.is_infinite()) {
    for (Eigen::Index i = 0; i < cols; ++i) {
      const auto col = v.col(i).array();
      const double m = col.abs().maxCoeff();
      const Eigen::ArrayXd up = ((col - m) / mu).exp();
      const Eigen::ArrayXd down = ((-col - m) / mu).exp();
      const double total = up.sum() + down.sum();
      if (g != nullptr) g->col(i) = ((up - down) / total).matrix();
      out[i] = m + mu * std::log(total);
    }
    return out;
  }
  // p == 1
  const Eigen::ArrayXXd root = (v.array().square() + mu * mu).sqrt();
  if (g != nullptr) *g = (v.array() / root).matrix();
  out = (root - mu).colwise().sum().transpose();
  return out;
}

// Sample-average family of linear maps v_i = B_i zeta, applied in batch:
// forward gives the matrix with columns B_i zeta, adjoint gives
// sum_i B_i^T G_i.
struct SaaMaps {
  Eigen::Index count = 0;
  Eigen::Index in_dim = 0;
  Eigen::Index out_dim = 0;
  std::function<void(const Vector&, Matrix&)> forward;
  std::function<void(const Matrix&, Vector&)> adjoint;
  Matrix gram;  // mean of B_i^T B_i
};

SaaMaps jacobian_maps(std::span<const Matrix> dh, Eigen::Index cap) {
  if (dh.empty()) throw Error(ErrorCode::empty_input, "no derivative samples");
  SaaMaps maps;
  maps.count = std::min<Eigen::Index>(static_cast<Eigen::Index>(dh.size()), std::max<Eigen::Index>(cap, 1));
  maps.in_dim = dh[0].rows();
  maps.out_dim = dh[0].cols();
  // Dh_i side by side: in_dim x (out_dim * count)
  auto stacked = std::make_shared<Matrix>(maps.in_dim, maps.out_dim * maps.count);
  for (Eigen::Index i = 0; i < maps.count; ++i) {
    const Matrix& m = dh[static_cast<std::size_t>(i)];
    if (m.rows() != maps.in_dim || m.cols() != maps.out_dim) {
      throw Error(ErrorCode::dimension, "derivative samples have inconsistent shapes");
    }
    stacked->middleCols(i * maps.out_dim, maps.out_dim) = m;
  }
  maps.gram = *stacked * stacked->transpose() / static_cast<double>(maps.count);
  const auto rows = maps.out_dim;
  const auto cols = maps.count;
  maps.forward = [stacked, rows, cols](const Vector& z, Matrix& v) {
    const Vector flat = stacked->transpose() * z;
    v = Eigen::Map<const Matrix>(flat.data(), rows, cols);
  };
  maps.adjoint = [stacked](const Matrix& g, Vector& gz) {
    gz.noalias() = *stacked * Eigen::Map<const Vector>(g.data(), g.size());
  };
  return maps;
}

// e_i xi - (xi^T X_i) beta
SaaMaps l1_maps(const Vector& beta, const Matrix& x, const Vector& e, Eigen::Index cap) {
  if (x.rows() == 0 || e.size() == 0) throw Error(ErrorCode::empty_input, "empty SAA sample");
  if (x.rows() != e.size()) throw Error(ErrorCode::dimension, "x and e samples must be paired");
  if (x.cols() != beta.size()) throw Error(ErrorCode::dimension, "beta length does not match x");
  SaaMaps maps;
  maps.count = std::min<Eigen::Index>(x.rows(), std::max<Eigen::Index>(cap, 1));
  maps.in_dim = beta.size();
  maps.out_dim = beta.size();
  auto xs = std::make_shared<Matrix>(x.topRows(maps.count));
  auto es = std::make_shared<Vector>(e.head(maps.count));
  auto b = std::make_shared<Vector>(beta);
  const double inv = 1.0 / static_cast<double>(maps.count);
  const double e2 = es->squaredNorm() * inv;
  const Vector ex = xs->transpose() * *es * inv;
  const Matrix xx = xs->transpose() * *xs * inv;
  maps.gram = e2 * Matrix::Identity(maps.in_dim, maps.in_dim) - ex * beta.transpose() -
              beta * ex.transpose() + beta.squaredNorm() * xx;
  maps.forward = [xs, es, b](const Vector& z, Matrix& v) {
    v.noalias() = z * es->transpose();
    v.noalias() -= *b * (*xs * z).transpose();
  };
  maps.adjoint = [xs, es, b](const Matrix& g, Vector& gz) {
    gz.noalias() = g * *es;
    gz.noalias() -= xs->transpose() * (g.transpose() * *b);
  };
  return maps;
}

// Throws unbounded_law when the linear term has a component along a
// direction in which every B_i vanishes.
void check_bounded(const SaaMaps& maps, const Vector& c) {
  const double cn = c.norm();
  if (cn == 0.0) return;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (maps.gram + maps.gram.transpose()));
  const double top = std::max(0.0, eig.eigenvalues().maxCoeff());
  const double cutoff = top > 0.0 ? 1e-12 * top : std::numeric_limits<double>::infinity();
  double leak = 0.0;
  for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) {
    if (eig.eigenvalues()[k] <= cutoff) {
      const double t = eig.eigenvectors().col(k).dot(c);
      leak += t * t;
    }
  }
  if (std::sqrt(leak) > 1e-9 * cn) {
    throw Error(ErrorCode::unbounded_law,
                "limit-law maximization is unbounded: the SAA penalty vanishes along a direction "
                "with positive linear gain (identifiability condition fails)");
  }
}

// max_z { c^T z - kappa * mean_i N(B_i z)^s }, s > 1.
DrawValue maximize_penalized(const Vector& c, double kappa, double s, const SaaMaps& maps,
                             Exponent p, const SolveOptions& opts) {
  check_bounded(maps, c);
  DrawValue out;
  if (c.norm() == 0.0) return out;  // z = 0 is optimal

  auto make_objective = [&](double mu) {
    return [&, mu](const Vector& z, Vector* grad) {
      Matrix v, g;
      maps.forward(z, v);
      const Eigen::ArrayXd n = column_norms(v, p, mu, grad ? &g : nullptr);
      const double inv = 1.0 / static_cast<double>(maps.count);
      const double pen = n.pow(s).sum();
      if (grad != nullptr) {
        const Eigen::ArrayXd w = s * n.pow(s - 1.0);
        g = g * w.matrix().asDiagonal();
        Vector gz;
        maps.adjoint(g, gz);
        *grad = c - kappa * inv * gz;
      }
      return c.dot(z) - kappa * inv * pen;
    };
  };

  detail::AscentOptions ao;
  ao.tol = opts.tol;
  ao.max_iter = opts.max_iter;
  ao.ceiling = opts.ceiling;
  ao.max_norm = opts.ceiling;
  ao.memory = 10;

  Vector z = Vector::Zero(maps.in_dim);
  auto finish = [&](const detail::AscentResult& r) {
    if (r.unbounded) {
      throw Error(ErrorCode::unbounded_law, "limit-law maximization diverged");
    }
    out.residual = r.grad_norm;
    out.converged = r.converged;
    z = r.x;
  };

  if (smooth_exponent(p)) {
    finish(detail::maximize_concave(make_objective(0.0), z, ao));
  } else {
    // continuation on the smoothing width, relative to the size of B_i z.
    // The smoothed value is within count * out_dim * mu of the exact one, so
    // stages stop on value progress rather than on the (ill-conditioned)
    // gradient.
    ao.value_tol = 1e-12;
    ao.tol = opts.tol * std::max(1.0, c.norm());
    const double base = std::sqrt(std::max(maps.gram.trace(), 1e-300) / static_cast<double>(maps.in_dim));
    finish(detail::maximize_concave(make_objective(1e-2 * base), z, ao));
    Matrix v;
    maps.forward(z, v);
    double scale = std::sqrt(v.squaredNorm() / static_cast<double>(maps.count * maps.out_dim));
    if (scale == 0.0) scale = base;
    for (double mu = 1e-3 * scale; mu >= opts.smoothing_floor * scale; mu *= 1e-1) {
      const auto r = detail::maximize_concave(make_objective(mu), z, ao);
      finish(r);
      out.converged = r.converged || r.value_stationary;
    }
  }
  // report the exact objective at the final point (a certified lower bound)
  out.value = std::max(0.0, make_objective(0.0)(z, nullptr));
  return out;
}

}  // namespace

DrawValue rbar_value(double rho, const Vector& h, std::span<const Matrix> dh, Exponent p,
                     const SolveOptions& opts) {
  if (!(rho > 1.0)) {
    throw Error(ErrorCode::invalid_argument,
                "rbar_value requires rho > 1; use rbar_one_value for rho = 1");
  }
  const SaaMaps maps = jacobian_maps(dh, opts.saa_size);
  if (h.size() != maps.in_dim) throw Error(ErrorCode::dimension, "H length must equal r");
  return maximize_penalized(rho * h, rho - 1.0, rho / (rho - 1.0), maps, p, opts);
}

DrawValue rbar_one_value(const Vector& h, std::span<const Matrix> dh, Exponent p,
                         const SolveOptions& opts) {
  const SaaMaps maps = jacobian_maps(dh, opts.saa_size);
  if (h.size() != maps.in_dim) throw Error(ErrorCode::dimension, "H length must equal r");
  check_bounded(maps, h);
  DrawValue out;
  const double hn2 = h.squaredNorm();
  if (hn2 == 0.0) return out;

  // max zeta^T H over {G(zeta) <= 1}, G = max_i ||B_i zeta||_p, equals
  // 1 / min{G(zeta) : zeta^T H = 1} by positive homogeneity of G.
  const Eigen::Index r = maps.in_dim;
  const Vector zeta0 = h / hn2;
  Matrix basis(r, r - 1);
  if (r > 1) {
    Eigen::HouseholderQR<Matrix> qr(h);
    basis = qr.householderQ() * Matrix::Identity(r, r).rightCols(r - 1);
  }

  auto gauge = [&](const Vector& zeta, double mu, Vector* grad) {
    Matrix v, g;
    maps.forward(zeta, v);
    const Eigen::ArrayXd norms = column_norms(v, p, mu, grad ? &g : nullptr);
    Eigen::Index arg = 0;
    const double top = norms.maxCoeff(&arg);
    if (mu <= 0.0) {
      if (grad != nullptr) {
        // subgradient from the first active sample
        Matrix active = Matrix::Zero(g.rows(), g.cols());
        active.col(arg) = g.col(arg);
        maps.adjoint(active, *grad);
      }
      return top;
    }
    const Eigen::ArrayXd wgt = ((norms - top) / mu).exp();
    const double total = wgt.sum();
    if (grad != nullptr) {
      g = g * (wgt / total).matrix().asDiagonal();
      maps.adjoint(g, *grad);
    }
    return top + mu * std::log(total);
  };

  Vector w = Vector::Zero(r - 1);
  double residual = 0.0;
  bool converged = true;
  if (r > 1) {
    detail::AscentOptions ao;
    ao.tol = opts.tol;
    ao.max_iter = opts.max_iter;
    ao.memory = 10;
    double mu = 1e-2 * gauge(zeta0, 0.0, nullptr);
    for (int stage = 0; stage < 6; ++stage, mu *= 1e-2) {
      auto objective = [&, mu](const Vector& wv, Vector* grad) {
        Vector g;
        const double val = gauge(zeta0 + basis * wv, mu, grad ? &g : nullptr);
        if (grad != nullptr) *grad = -(basis.transpose() * g);
        return -val;
      };
      const auto res = detail::maximize_concave(objective, w, ao);
      w = res.x;
      residual = res.grad_norm;
      converged = res.converged;
    }
  }
  const double g = gauge(zeta0 + basis * w, 0.0, nullptr);
  if (!(g > 0.0)) throw Error(ErrorCode::unbounded_law, "constraint set is unbounded along H");
  out.value = 1.0 / g;
  out.residual = residual;
  out.converged = converged;
  return out;
}

DrawValue l1_value(double sigma, const Vector& beta_star, const Matrix& x_sample,
                   const Vector& e_sample, const Vector& z, Exponent p, const SolveOptions& opts) {
  if (!(sigma >= 0.0)) throw Error(ErrorCode::invalid_argument, "sigma must be nonnegative");
  const SaaMaps maps = l1_maps(beta_star, x_sample, e_sample, opts.saa_size);
  if (z.size() != maps.in_dim) throw Error(ErrorCode::dimension, "Z length must equal d");
  return maximize_penalized(2.0 * sigma * z, 1.0, 2.0, maps, p, opts);
}

double l2_value(const Vector& z, Exponent q, double error_factor) {
  if (!(error_factor > 0.0)) {
    throw Error(ErrorCode::invalid_factor, "error factor must be positive");
  }
  const double n = lp_norm(z, q);
  return error_factor * n * n;
}

double l4_value(const Vector& z, Exponent q) { return lp_norm(z, q); }

double normal_error_factor() { return std::numbers::pi / (std::numbers::pi - 2.0); }

double error_factor_from_sample(const Vector& e) {
  if (e.size() == 0) throw Error(ErrorCode::empty_input, "empty error sample");
  const double m2 = e.squaredNorm() / static_cast<double>(e.size());
  const double m1 = e.cwiseAbs().mean();
  const double var_abs = m2 - m1 * m1;
  if (!(var_abs > 0.0)) throw Error(ErrorCode::invalid_factor, "error sample has Var|e| = 0");
  return m2 / var_abs;
}

// Samplers -----------------------------------------------------------------------

namespace {

template <typename DrawFn>
LimitSampleBatch run_draws(LimitLaw law, std::size_t n_draws, RngSeed seed, int threads,
                           DrawFn&& draw) {
  LimitSampleBatch batch;
  batch.law = law;
  batch.seed = seed;
  batch.values.assign(n_draws, 0.0);
  std::vector<DrawValue> info(n_draws);
  parallel_for(n_draws, threads, [&](std::size_t i) {
    auto gen = seed.stream(i);
    info[i] = draw(gen);
    batch.values[i] = info[i].value;
  });
  for (const auto& d : info) {
    if (!d.converged) ++batch.meta.not_converged;
    batch.meta.max_residual = std::max(batch.meta.max_residual, d.residual);
  }
  return batch;
}

CovarianceFactor h_factor(const Matrix& h_samples) {
  if (h_samples.rows() < 2) throw Error(ErrorCode::empty_input, "need at least two h samples");
  return CovarianceFactor::from_covariance(sample_covariance(h_samples), "cov(h)");
}

}  // namespace

LimitSampleBatch sample_rbar(double rho, const Matrix& h_samples, std::span<const Matrix> dh_samples,
                             Exponent p, std::size_t n_draws, RngSeed seed,
                             const SolveOptions& opts) {
  if (!(rho > 1.0)) {
    throw Error(ErrorCode::invalid_argument,
                "sample_rbar requires rho > 1; use sample_rbar_one for rho = 1");
  }
  const auto factor = h_factor(h_samples);
  const SaaMaps maps = jacobian_maps(dh_samples, opts.saa_size);
  if (factor.dim() != maps.in_dim) throw Error(ErrorCode::dimension, "h and Dh dimensions differ");
  // fail fast: a null direction of the penalty makes almost every draw unbounded
  if (n_draws > 0 && maps.gram.norm() == 0.0) {
    throw Error(ErrorCode::unbounded_law, "all derivative samples vanish; R-bar is unbounded");
  }
  auto batch = run_draws(LimitLaw::rbar_rho, n_draws, seed, opts.threads, [&](std::mt19937_64& gen) {
    const Vector hdraw = factor.draw(gen);
    return maximize_penalized(rho * hdraw, rho - 1.0, rho / (rho - 1.0), maps, p, opts);
  });
  batch.meta.rho = rho;
  batch.meta.exponent = p.to_string();
  batch.meta.factor_id = factor.id();
  batch.meta.saa_size = maps.count;
  return batch;
}

LimitSampleBatch sample_rbar_one(const Matrix& h_samples, std::span<const Matrix> dh_samples,
                                 Exponent p, std::size_t n_draws, RngSeed seed,
                                 const SolveOptions& opts) {
  const auto factor = h_factor(h_samples);
  const SaaMaps maps = jacobian_maps(dh_samples, opts.saa_size);
  if (factor.dim() != maps.in_dim) throw Error(ErrorCode::dimension, "h and Dh dimensions differ");
  if (n_draws > 0 && maps.gram.norm() == 0.0) {
    throw Error(ErrorCode::unbounded_law, "all derivative samples vanish; R-bar(1) is unbounded");
  }
  auto batch = run_draws(LimitLaw::rbar_one, n_draws, seed, opts.threads, [&](std::mt19937_64& gen) {
    const Vector hdraw = factor.draw(gen);
    return rbar_one_value(hdraw, dh_samples, p, opts);
  });
  batch.meta.rho = 1.0;
  batch.meta.exponent = p.to_string();
  batch.meta.factor_id = factor.id();
  batch.meta.saa_size = maps.count;
  return batch;
}

LimitSampleBatch sample_l1(double sigma, const Vector& beta_star, const Matrix& x_sample,
                           const Vector& e_sample, const CovarianceFactor& sigma_factor, Exponent p,
                           std::size_t n_draws, RngSeed seed, const SolveOptions& opts) {
  const SaaMaps maps = l1_maps(beta_star, x_sample, e_sample, opts.saa_size);
  if (sigma_factor.dim() != maps.in_dim) throw Error(ErrorCode::dimension, "Sigma factor dimension mismatch");
  auto batch = run_draws(LimitLaw::l1, n_draws, seed, opts.threads, [&](std::mt19937_64& gen) {
    const Vector z = sigma_factor.draw(gen);
    return maximize_penalized(2.0 * sigma * z, 1.0, 2.0, maps, p, opts);
  });
  batch.meta.rho = 2.0;
  batch.meta.exponent = p.to_string();
  batch.meta.factor_id = sigma_factor.id();
  batch.meta.saa_size = maps.count;
  return batch;
}

LimitSampleBatch sample_l2(const CovarianceFactor& sigma_factor, Exponent q, double error_factor,
                           std::size_t n_draws, RngSeed seed, int threads) {
  if (!(error_factor > 0.0)) throw Error(ErrorCode::invalid_factor, "error factor must be positive");
  auto batch = run_draws(LimitLaw::l2, n_draws, seed, threads, [&](std::mt19937_64& gen) {
    return DrawValue{l2_value(sigma_factor.draw(gen), q, error_factor), 0.0, true};
  });
  batch.meta.rho = 2.0;
  batch.meta.exponent = q.to_string();
  batch.meta.factor_id = sigma_factor.id();
  batch.meta.error_factor = error_factor;
  return batch;
}

LimitSampleBatch sample_l4(const CovarianceFactor& second_moment_factor, Exponent q,
                           std::size_t n_draws, RngSeed seed, int threads) {
  auto batch = run_draws(LimitLaw::l4, n_draws, seed, threads, [&](std::mt19937_64& gen) {
    return DrawValue{l4_value(second_moment_factor.draw(gen), q), 0.0, true};
  });
  batch.meta.rho = 1.0;
  batch.meta.exponent = q.to_string();
  batch.meta.factor_id = second_moment_factor.id();
  return batch;
}

// Quantiles ------------------------------------------------------------------------

namespace {

std::size_t order_index(std::size_t n, double level) {
  // smallest k with k/n >= level; the relative guard keeps 0.95 * 100 at 95
  const double raw = level * static_cast<double>(n);
  auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  return std::clamp<std::size_t>(k, 1, n) - 1;
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::invalid_level, "quantile level must lie in (0, 1)");
  }
}

}  // namespace

double empirical_quantile(std::span<const double> values, double level) {
  check_level(level);
  if (values.empty()) throw Error(ErrorCode::empty_input, "quantile of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  const auto k = order_index(v.size(), level);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

QuantileEstimate quantile(std::span<const double> values, double level, RngSeed bootstrap_seed,
                          int resamples) {
  QuantileEstimate q;
  q.level = level;
  q.value = empirical_quantile(values, level);
  q.sample_size = values.size();
  if (resamples < 2) return q;
  const auto n = values.size();
  const auto k = order_index(n, level);
  std::vector<double> stats(static_cast<std::size_t>(resamples));
  std::vector<double> buf(n);
  for (int b = 0; b < resamples; ++b) {
    auto gen = bootstrap_seed.stream(static_cast<std::uint64_t>(b));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (auto& x : buf) x = values[pick(gen)];
    std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(k), buf.end());
    stats[static_cast<std::size_t>(b)] = buf[k];
  }
  double mean = 0.0;
  for (double s : stats) mean += s;
  mean /= resamples;
  double ss = 0.0;
  for (double s : stats) ss += (s - mean) * (s - mean);
  q.standard_error = std::sqrt(ss / (resamples - 1));
  return q;
}

QuantileEstimate quantile(const LimitSampleBatch& batch, double level) {
  return quantile(batch.values, level, batch.seed.child(0xB0075742ULL));
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::invalid_level, "normal quantile needs p in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double normal_upper_quantile(double tail) {
  if (!(tail > 0.0 && tail < 1.0)) throw Error(ErrorCode::invalid_level, "tail probability must be in (0,1)");
  return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<double>(), tail));
}

double lambda_highdim(std::size_t n, std::size_t d, double alpha) {
  if (n < 1 || d < 1) throw Error(ErrorCode::invalid_argument, "n and d must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::invalid_level, "alpha must lie in (0, 1)");
  const double tail = alpha / (2.0 * static_cast<double>(d));
  if (tail >= 1.0) throw Error(ErrorCode::invalid_level, "alpha / (2d) must be below 1");
  return normal_error_factor() * normal_upper_quantile(tail) / std::sqrt(static_cast<double>(n));
}

double growth_C(const Matrix& x_sample, std::size_t n) {
  if (x_sample.rows() == 0) throw Error(ErrorCode::empty_input, "empty predictor sample");
  if (n < 1) throw Error(ErrorCode::invalid_argument, "n must be positive");
  const double mean_inf = x_sample.cwiseAbs().rowwise().maxCoeff().mean();
  return mean_inf / std::sqrt(static_cast<double>(n));
}

void write_batch_csv(std::ostream& out, const LimitSampleBatch& batch) {
  out << "law,index,value\n";
  const auto name = to_string(batch.law);
  for (std::size_t i = 0; i < batch.values.size(); ++i) {
    out << name << ',' << i << ',' << format_number(batch.values[i]) << '\n';
  }
}

}  // namespace rwpi::limits
