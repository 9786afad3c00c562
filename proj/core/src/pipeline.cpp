#include "rwpi/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>

#include "rwpi/dro.hpp"
#include "rwpi/parallel.hpp"

namespace rwpi::pipeline {

std::string to_string(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::l1: return "L1";
    case SelectionMethod::l2: return "L2";
    case SelectionMethod::l4: return "L4";
    case SelectionMethod::highdim: return "HIGHDIM";
  }
  return "?";
}

SelectionMethod parse_selection_method(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "l1") return SelectionMethod::l1;
  if (t == "l2") return SelectionMethod::l2;
  if (t == "l4") return SelectionMethod::l4;
  if (t == "highdim") return SelectionMethod::highdim;
  throw Error(ErrorCode::config, "unknown selection method '" + text + "'");
}

void RegularizationChoice::validate() const {
  const double slack = 1e-12 * std::max(1.0, std::abs(delta));
  if (method == SelectionMethod::l4) {
    if (std::abs(lambda - delta) > slack) {
      throw Error(ErrorCode::invalid_argument, "logistic choice requires lambda = delta");
    }
  } else if (std::abs(lambda * lambda - delta) > slack) {
    throw Error(ErrorCode::invalid_argument, "linear choice requires delta = lambda^2");
  }
  if (!(lambda >= 0.0)) throw Error(ErrorCode::invalid_argument, "negative lambda");
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::invalid_level, "alpha must lie in (0, 1)");
  }
}

void check_draws(const SelectionOptions& opts) {
  if (opts.mc_draws == 0) throw Error(ErrorCode::config, "mc_draws must be at least 1");
}

}  // namespace

RegularizationChoice select_lambda_linear(SelectionMethod method, std::size_t n, std::size_t d,
                                          const LinearSelectionInput& input,
                                          const SelectionOptions& opts) {
  check_alpha(opts.alpha);
  if (n == 0) throw Error(ErrorCode::config, "n must be positive");
  RegularizationChoice c;
  c.alpha = opts.alpha;
  c.method = method;
  c.seed = opts.seed;
  c.n = n;
  c.q = opts.q;
  const double nn = static_cast<double>(n);

  if (method == SelectionMethod::highdim) {
    c.lambda = limits::lambda_highdim(n, d, opts.alpha);
    c.delta = c.lambda * c.lambda;
    c.eta_hat = nn * c.delta;
    c.validate();
    return c;
  }
  if (method == SelectionMethod::l4) {
    throw Error(ErrorCode::config, "L4 selects lambda for logistic regression; use select_lambda_logistic");
  }
  check_draws(opts);
  c.mc_draws = opts.mc_draws;

  std::optional<limits::CovarianceFactor> factor = input.factor;
  if (!factor) {
    if (!input.x_sample) {
      throw Error(ErrorCode::config, "L1/L2 selection needs a covariance factor or a predictor sample");
    }
    factor = limits::CovarianceFactor::from_covariance(sample_covariance(*input.x_sample));
  }

  limits::LimitSampleBatch batch;
  if (method == SelectionMethod::l2) {
    batch = limits::sample_l2(*factor, opts.q, input.error_factor, opts.mc_draws, opts.seed, opts.threads);
  } else {
    if (!input.x_sample || !input.e_sample || !input.beta_star) {
      throw Error(ErrorCode::config, "L1 selection needs predictor and error samples and beta_star");
    }
    const Vector& e = *input.e_sample;
    const double sigma =
        input.sigma > 0.0 ? input.sigma : std::sqrt(e.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, e.size())));
    auto solve = opts.solve;
    solve.threads = opts.threads;
    batch = limits::sample_l1(sigma, *input.beta_star, *input.x_sample, e, *factor, dual_exponent(opts.q),
                              opts.mc_draws, opts.seed, solve);
  }
  const auto est = limits::quantile(batch, 1.0 - opts.alpha);
  c.eta_hat = est.value;
  c.eta_standard_error = est.standard_error;
  c.delta = c.eta_hat / nn;
  c.lambda = std::sqrt(c.delta);
  c.delta = c.lambda * c.lambda;
  c.validate();
  return c;
}

RegularizationChoice select_lambda_logistic(const Dataset& ds, const SelectionOptions& opts) {
  if (ds.kind() != TaskKind::binary) {
    throw Error(ErrorCode::kind_mismatch, "logistic selection requires a binary dataset");
  }
  check_alpha(opts.alpha);
  check_draws(opts);
  const auto factor = limits::CovarianceFactor::from_covariance(second_moment(ds.x()), "second-moment");
  const auto batch = limits::sample_l4(factor, opts.q, opts.mc_draws, opts.seed, opts.threads);
  const auto est = limits::quantile(batch, 1.0 - opts.alpha);
  RegularizationChoice c;
  c.alpha = opts.alpha;
  c.method = SelectionMethod::l4;
  c.mc_draws = opts.mc_draws;
  c.seed = opts.seed;
  c.n = static_cast<std::size_t>(ds.n());
  c.q = opts.q;
  c.eta_hat = est.value;
  c.eta_standard_error = est.standard_error;
  c.lambda = c.eta_hat / std::sqrt(static_cast<double>(ds.n()));
  c.delta = c.lambda;
  c.validate();
  return c;
}

// Data ------------------------------------------------------------------------

GeneratedData generate_linear_data(std::size_t n, std::size_t d, double sigma, RngSeed seed) {
  if (d < 4) throw Error(ErrorCode::config, "the linear model needs d >= 4");
  if (n == 0) throw Error(ErrorCode::config, "n must be positive");
  if (!(sigma >= 0.0)) throw Error(ErrorCode::config, "sigma must be >= 0");
  const auto di = static_cast<Eigen::Index>(d);
  const auto ni = static_cast<Eigen::Index>(n);
  Vector beta = Vector::Zero(di);
  beta[0] = 3.0;
  beta[1] = 2.0;
  beta[3] = 1.5;

  // AR(0.5) recursion, equivalent to the lower-triangular root of 0.5^{|k-j|}
  const double phi = 0.5;
  const double innov = std::sqrt(1.0 - phi * phi);
  Matrix x(ni, di);
  auto gx = seed.stream(0);
  Vector z(di);
  for (Eigen::Index i = 0; i < ni; ++i) {
    fill_standard_normal(gx, z);
    double prev = z[0];
    x(i, 0) = prev;
    for (Eigen::Index j = 1; j < di; ++j) {
      prev = phi * prev + innov * z[j];
      x(i, j) = prev;
    }
  }
  Vector e(ni);
  auto ge = seed.stream(1);
  fill_standard_normal(ge, e);
  Vector y = x * beta + sigma * e;
  return GeneratedData{Dataset(std::move(x), std::move(y), TaskKind::regression), std::move(beta)};
}

// Experiments ---------------------------------------------------------------------

std::string to_string(ExperimentMethod m) {
  switch (m) {
    case ExperimentMethod::rwpi: return "RWPI";
    case ExperimentMethod::glasso_cv: return "GLASSO_CV";
    case ExperimentMethod::ols: return "OLS";
  }
  return "?";
}

ExperimentMethod parse_experiment_method(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "rwpi") return ExperimentMethod::rwpi;
  if (t == "glasso_cv" || t == "glasso-cv" || t == "cv") return ExperimentMethod::glasso_cv;
  if (t == "ols") return ExperimentMethod::ols;
  throw Error(ErrorCode::config, "unknown experiment method '" + text + "'");
}

void ExperimentConfig::validate() const {
  if (reps == 0) throw Error(ErrorCode::config, "reps must be at least 1");
  check_alpha(alpha);
  if (methods.empty()) throw Error(ErrorCode::config, "methods is empty");
  if (method == SelectionMethod::l4) throw Error(ErrorCode::config, "L4 is a logistic method; experiments are linear");
  if (method != SelectionMethod::highdim && mc_draws == 0) throw Error(ErrorCode::config, "mc_draws must be at least 1");
  if (cv_folds < 2) throw Error(ErrorCode::config, "cv_folds must be at least 2");
  if (cv_grid == 0) throw Error(ErrorCode::config, "cv_grid must be at least 1");
  if (threads < 1) throw Error(ErrorCode::config, "threads must be at least 1");
  if (!(smoothing_floor > 0.0 && smoothing_floor < 1.0)) throw Error(ErrorCode::config, "smoothing_floor must lie in (0, 1)");
  if (!data) {
    if (d < 4) throw Error(ErrorCode::config, "d must be at least 4");
    if (n < 2) throw Error(ErrorCode::config, "n must be at least 2");
    if (test_size == 0) throw Error(ErrorCode::config, "test_size must be positive");
    if (!(sigma >= 0.0)) throw Error(ErrorCode::config, "sigma must be >= 0");
  }
}

namespace {

struct SplitData {
  Dataset train;
  Dataset test;
  std::optional<Vector> beta_original;
  ColumnScaling scaling;
  double sigma_sq = 0.0;            // on the fitted response scale
};

// Maps standardized coefficients back to the original predictor scale.
Vector to_original(const Vector& beta, const ColumnScaling& s) {
  Vector b = beta.cwiseQuotient(s.sd);
  if (s.scale_response) b *= s.y_sd;
  return b;
}

std::vector<ExperimentRow> run_replication(const ExperimentConfig& cfg, const SplitData& sd,
                                           std::size_t rep, RngSeed rs) {
  const Exponent p = dual_exponent(cfg.q);
  if (!(p == Exponent::finite(1.0) || p == Exponent::finite(2.0))) {
    throw Error(ErrorCode::config, "q must be inf or 2 so that the penalty is l1 or l2");
  }
  const auto penalty = p == Exponent::finite(1.0) ? solvers::PenaltyNorm::l1 : solvers::PenaltyNorm::l2;
  const auto& train = sd.train;
  const auto n = static_cast<std::size_t>(train.n());
  const auto d = static_cast<std::size_t>(train.d());

  std::vector<ExperimentRow> rows;
  auto make_row = [&](ExperimentMethod m, const Vector& beta, double lambda) {
    ExperimentRow row;
    row.rep = rep;
    row.method = m;
    row.n = n;
    row.d = d;
    row.lambda = lambda;
    row.train_mse = dro::mean_squared_error(train, beta);
    row.test_mse = dro::mean_squared_error(sd.test, beta);
    if (sd.beta_original) {
      const Vector diff = to_original(beta, sd.scaling) - *sd.beta_original;
      row.l1_err = diff.lpNorm<1>();
      row.l2_err = diff.norm();
    }
    return row;
  };

  for (const auto m : cfg.methods) {
    if (m == ExperimentMethod::rwpi) {
      SelectionOptions sel;
      sel.alpha = cfg.alpha;
      sel.q = cfg.q;
      sel.mc_draws = cfg.mc_draws;
      sel.seed = rs.child(2);
      sel.solve.saa_size = cfg.saa_size;
      sel.solve.smoothing_floor = cfg.smoothing_floor;
      LinearSelectionInput input;
      input.x_sample = train.x();
      if (cfg.method == SelectionMethod::l1) {
        // plug-in coefficients and errors from a pilot fit at the L2 choice
        auto pilot_sel = sel;
        pilot_sel.seed = rs.child(4);
        const auto pilot_choice = select_lambda_linear(SelectionMethod::l2, n, d, input, pilot_sel);
        const auto pilot = solvers::fit_sqrt_lasso(train, pilot_choice.lambda, penalty);
        input.beta_star = pilot.beta;
        input.e_sample = train.y() - train.x() * pilot.beta;
      }
      const auto choice = select_lambda_linear(cfg.method, n, d, input, sel);
      const auto fit = solvers::fit_sqrt_lasso(train, choice.lambda, penalty);
      auto row = make_row(m, fit.beta, choice.lambda);
      if (!cfg.data) {
        const auto wc = dro::worstcase_linear_closed(train, fit.beta, choice.delta, p);
        row.coverage_hit = sd.sigma_sq <= wc.value;
      }
      rows.push_back(row);
    } else if (m == ExperimentMethod::glasso_cv) {
      const double top = solvers::sqrt_lasso_zero_threshold(train, penalty);
      if (!(top > 0.0)) {
        rows.push_back(make_row(m, Vector::Zero(train.d()), 0.0));
        continue;
      }
      const auto grid = solvers::log_grid(top, cfg.cv_grid);
      solvers::CvOptions cv;
      cv.folds = cfg.cv_folds;
      cv.penalty = penalty;
      const auto res = solvers::cross_validate_lambda(train, grid, solvers::CvObjective::sqrt_lasso, rs.child(3), cv);
      const auto fit = solvers::fit_sqrt_lasso(train, res.lambda, penalty);
      rows.push_back(make_row(m, fit.beta, res.lambda));
    } else {
      if (train.n() < train.d()) continue;
      const auto fit = solvers::fit_ols(train);
      rows.push_back(make_row(m, fit.beta, 0.0));
    }
  }
  return rows;
}

std::vector<ExperimentRow> run_all(const ExperimentConfig& cfg,
                                   const std::function<SplitData(std::size_t, RngSeed)>& make) {
  std::vector<std::vector<ExperimentRow>> per_rep(cfg.reps);
  parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
    const RngSeed rs = cfg.seed.child(r);
    per_rep[r] = run_replication(cfg, make(r, rs), r, rs);
  });
  std::vector<ExperimentRow> rows;
  for (auto& v : per_rep) rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

ExperimentReport finish(std::vector<ExperimentRow> rows, const ExperimentConfig& cfg) {
  ExperimentReport report;
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.rep != b.rep ? a.rep < b.rep : static_cast<int>(a.method) < static_cast<int>(b.method);
  });
  report.rows = std::move(rows);
  report.aggregates = aggregate(report.rows);
  const bool wants_ols = std::find(cfg.methods.begin(), cfg.methods.end(), ExperimentMethod::ols) != cfg.methods.end();
  const bool has_ols = std::any_of(report.rows.begin(), report.rows.end(),
                                   [](const auto& r) { return r.method == ExperimentMethod::ols; });
  if (wants_ols && !has_ols) report.notes.emplace_back("OLS not applicable: n < d");
  report.notes.emplace_back("coverage uses the training empirical measure at the fitted beta");
  report.notes.emplace_back("spread is the standard deviation across replications");
  report.digest = rows_digest(report.rows);
  return report;
}

}  // namespace

ExperimentReport run_experiment_sim(const ExperimentConfig& cfg) {
  cfg.validate();
  auto rows = run_all(cfg, [&](std::size_t, RngSeed rs) {
    auto train = generate_linear_data(cfg.n, cfg.d, cfg.sigma, rs.child(0));
    auto test = generate_linear_data(cfg.test_size, cfg.d, cfg.sigma, rs.child(1));
    auto scaling = ColumnScaling::fit(train.data, cfg.scale_response);
    // no intercept is fitted, so the response is always centered
    if (!scaling.scale_response) scaling.y_mean = train.data.y().mean();
    double s2 = cfg.sigma * cfg.sigma;
    if (scaling.scale_response) s2 /= scaling.y_sd * scaling.y_sd;
    return SplitData{scaling.apply(train.data), scaling.apply(test.data), train.beta_star, scaling, s2};
  });
  return finish(std::move(rows), cfg);
}

ExperimentReport run_experiment_csv(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.data) throw Error(ErrorCode::config, "CSV experiment needs a data path");
  // standardize once, then split
  const Dataset raw = read_dataset_csv(*cfg.data, cfg.response, TaskKind::regression);
  Dataset all = standardize(raw, StandardizeOptions{cfg.scale_response});
  if (!cfg.scale_response) {
    all = Dataset(all.x(), all.y().array() - all.y().mean(), TaskKind::regression, true, all.column_names());
  }
  const auto total = static_cast<std::size_t>(all.n());
  if (cfg.train_size >= total) {
    throw Error(ErrorCode::config, "train_size must be smaller than the number of rows (" +
                                       std::to_string(total) + "): the test set would be empty");
  }
  if (cfg.train_size < 2) throw Error(ErrorCode::config, "train_size must be at least 2");
  ColumnScaling identity;
  identity.mean = Vector::Zero(all.d());
  identity.sd = Vector::Ones(all.d());
  auto rows = run_all(cfg, [&](std::size_t, RngSeed rs) {
    std::vector<Eigen::Index> order(total);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto gen = rs.child(0).stream(0);
    std::shuffle(order.begin(), order.end(), gen);
    std::vector<Eigen::Index> tr(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cfg.train_size));
    std::vector<Eigen::Index> te(order.begin() + static_cast<std::ptrdiff_t>(cfg.train_size), order.end());
    return SplitData{all.subset(tr), all.subset(te), std::nullopt, identity, 0.0};
  });
  return finish(std::move(rows), cfg);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  return cfg.data ? run_experiment_csv(cfg) : run_experiment_sim(cfg);
}

double coverage_probability(const std::vector<ExperimentRow>& rows) {
  std::size_t total = 0;
  std::size_t hits = 0;
  for (const auto& r : rows) {
    if (!r.coverage_hit) continue;
    ++total;
    hits += *r.coverage_hit ? 1 : 0;
  }
  if (total == 0) throw Error(ErrorCode::empty_input, "no rows carry a coverage outcome");
  return static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<ExperimentAggregate> aggregate(const std::vector<ExperimentRow>& rows) {
  std::map<int, std::vector<const ExperimentRow*>> groups;
  for (const auto& r : rows) groups[static_cast<int>(r.method)].push_back(&r);
  auto mean_sd = [](const std::vector<double>& v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return std::pair{m, sd};
  };
  std::vector<ExperimentAggregate> out;
  for (const auto& [key, group] : groups) {
    ExperimentAggregate a;
    a.method = static_cast<ExperimentMethod>(key);
    a.n = group.front()->n;
    a.d = group.front()->d;
    a.reps = group.size();
    std::vector<double> tr, te, l1, l2;
    std::size_t hits = 0;
    std::size_t with_cov = 0;
    for (const auto* r : group) {
      tr.push_back(r->train_mse);
      te.push_back(r->test_mse);
      if (r->l1_err) l1.push_back(*r->l1_err);
      if (r->l2_err) l2.push_back(*r->l2_err);
      if (r->coverage_hit) {
        ++with_cov;
        hits += *r->coverage_hit ? 1 : 0;
      }
    }
    std::tie(a.train_mean, a.train_sd) = mean_sd(tr);
    std::tie(a.test_mean, a.test_sd) = mean_sd(te);
    if (!l1.empty()) a.l1_mean = mean_sd(l1).first;
    if (!l2.empty()) a.l2_mean = mean_sd(l2).first;
    if (with_cov > 0) a.coverage = static_cast<double>(hits) / static_cast<double>(with_cov);
    out.push_back(a);
  }
  return out;
}

void write_rows_csv(std::ostream& out, const std::vector<ExperimentRow>& rows) {
  out << "rep,method,n,d,lambda,train_mse,test_mse,l1_err,l2_err,coverage_hit\n";
  for (const auto& r : rows) {
    out << r.rep << ',' << to_string(r.method) << ',' << r.n << ',' << r.d << ','
        << format_number(r.lambda) << ',' << format_number(r.train_mse) << ','
        << format_number(r.test_mse) << ',' << (r.l1_err ? format_number(*r.l1_err) : "") << ','
        << (r.l2_err ? format_number(*r.l2_err) : "") << ','
        << (r.coverage_hit ? (*r.coverage_hit ? "1" : "0") : "") << '\n';
  }
}

std::string rows_digest(const std::vector<ExperimentRow>& rows) {
  std::ostringstream text;
  write_rows_csv(text, rows);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace rwpi::pipeline
