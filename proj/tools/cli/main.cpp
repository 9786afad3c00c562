#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "emit.hpp"
#include "inputs.hpp"
#include "rwpi/parallel.hpp"

namespace rwpi::cli {
namespace {

// A semantic flag problem found after parsing. Exit status 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] void usage(const std::string& flag, const std::string& what) {
  throw UsageError(flag + ": " + what);
}

Exponent exponent_flag(const std::string& text, const std::string& flag) {
  try {
    return Exponent::parse(text);
  } catch (const Error& e) {
    usage(flag, e.what());
  }
}

solvers::PenaltyNorm penalty_flag(const std::string& text) {
  try {
    return solvers::parse_penalty_norm(text);
  } catch (const Error& e) {
    usage("--p", e.what());
  }
}

Dataset load_dataset(const std::string& path, const std::string& response, TaskKind kind, bool scale) {
  Dataset ds = read_dataset_csv(path, response, kind);
  return scale ? standardize(ds) : ds;
}

std::optional<limits::CovarianceFactor> ar_or_identity(std::size_t d, std::optional<double> ar) {
  if (d == 0) return std::nullopt;
  const auto di = static_cast<Eigen::Index>(d);
  return ar ? limits::CovarianceFactor::autoregressive(di, *ar) : limits::CovarianceFactor::identity(di);
}

// gen-data ------------------------------------------------------------------------

void add_gen_data(CLI::App& app, std::function<void()>& action) {
  struct Opts {
    std::size_t n = 0, d = 0;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("gen-data", "Simulate Y = 3X1 + 2X2 + 1.5X4 + e with AR(0.5) predictors");
  cmd->add_option("--n", o->n, "rows")->required();
  cmd->add_option("--d", o->d, "predictors (>= 4)")->required();
  cmd->add_option("--sigma", o->sigma, "error standard deviation")->required();
  cmd->add_option("--seed", o->seed, "master seed")->required();
  cmd->add_option("--out", o->out, "output CSV")->required();
  cmd->callback([o, &action] {
    action = [o] {
      const auto g = pipeline::generate_linear_data(o->n, o->d, o->sigma, RngSeed{o->seed});
      write_dataset_csv(o->out, g.data);
      Json j;
      j["n"] = o->n;
      j["d"] = o->d;
      j["sigma"] = num(o->sigma);
      j["seed"] = o->seed;
      j["out"] = o->out;
      j["beta_star"] = vec(g.beta_star);
      emit_json(j);
    };
  });
}

// select-lambda -------------------------------------------------------------------

void add_select_lambda(CLI::App& app, std::function<void()>& action) {
  struct Opts {
    std::string method;
    double alpha = 0.05;
    std::size_t n = 0, d = 0, mc = 1000, saa = 1000;
    std::string data, response = "y", q = "inf", beta_file;
    std::uint64_t seed = 0;
    int threads = default_threads();
    bool standardize = false;
    std::optional<double> ar;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("select-lambda", "Choose the regularization level from a limit law");
  cmd->add_option("--method", o->method, "l1, l2, l4 or highdim")
      ->required()
      ->check(CLI::IsMember({"l1", "l2", "l4", "highdim"}));
  cmd->add_option("--alpha", o->alpha, "1 - confidence level")->required();
  cmd->add_option("--n", o->n, "training sample size")->required();
  cmd->add_option("--d", o->d, "dimension when no data is given");
  cmd->add_option("--data", o->data, "CSV with predictors (plug-in covariance)");
  cmd->add_option("--response", o->response, "response column")->capture_default_str();
  cmd->add_option("--q", o->q, "transport cost norm")->capture_default_str();
  cmd->add_option("--mc", o->mc, "Monte Carlo draws")->capture_default_str();
  cmd->add_option("--seed", o->seed, "master seed")->required();
  cmd->add_option("--beta-file", o->beta_file, "coefficients for l1");
  cmd->add_option("--saa", o->saa, "SAA size for l1")->capture_default_str();
  cmd->add_option("--ar", o->ar, "AR coefficient of the covariance when no data is given");
  cmd->add_option("--threads", o->threads)->capture_default_str();
  cmd->add_flag("--standardize", o->standardize, "standardize predictors first");
  cmd->callback([o, &action] {
    const auto method = pipeline::parse_selection_method(o->method);
    const Exponent q = exponent_flag(o->q, "--q");
    if (o->mc == 0 && method != pipeline::SelectionMethod::highdim) usage("--mc", "must be at least 1");
    if (method == pipeline::SelectionMethod::l4 && o->data.empty()) usage("--data", "required for l4");
    if (method == pipeline::SelectionMethod::l1 && (o->data.empty() || o->beta_file.empty())) {
      usage(o->data.empty() ? "--data" : "--beta-file", "required for l1");
    }
    if (method == pipeline::SelectionMethod::highdim && o->d == 0 && o->data.empty()) {
      usage("--d", "required for highdim without --data");
    }
    if (method == pipeline::SelectionMethod::l2 && o->d == 0 && o->data.empty()) {
      usage("--data", "l2 needs --data or --d");
    }
    action = [o, method, q] {
      pipeline::SelectionOptions sel;
      sel.alpha = o->alpha;
      sel.q = q;
      sel.mc_draws = o->mc;
      sel.seed = RngSeed{o->seed};
      sel.threads = o->threads;
      sel.solve.saa_size = static_cast<Eigen::Index>(o->saa);
      pipeline::RegularizationChoice choice;
      if (method == pipeline::SelectionMethod::l4) {
        const auto ds = load_dataset(o->data, o->response, TaskKind::binary, o->standardize);
        choice = pipeline::select_lambda_logistic(ds, sel);
        choice.n = o->n;
        choice.lambda = choice.eta_hat / std::sqrt(static_cast<double>(o->n));
        choice.delta = choice.lambda;
      } else {
        pipeline::LinearSelectionInput input;
        std::size_t d = o->d;
        if (!o->data.empty()) {
          const auto ds = load_dataset(o->data, o->response, TaskKind::regression, o->standardize);
          d = static_cast<std::size_t>(ds.d());
          input.x_sample = ds.x();
          if (method == pipeline::SelectionMethod::l1) {
            const Vector beta = read_beta_file(o->beta_file);
            if (beta.size() != ds.d()) throw Error(ErrorCode::dimension, "--beta-file length differs from d");
            input.beta_star = beta;
            input.e_sample = ds.y() - ds.x() * beta;
          }
        } else {
          input.factor = ar_or_identity(d, o->ar);
        }
        choice = pipeline::select_lambda_linear(method, o->n, d, input, sel);
      }
      choice.validate();
      emit_json(to_json(choice));
    };
  });
}

// fit ---------------------------------------------------------------------------

void add_fit(CLI::App& app, std::function<void()>& action) {
  struct Opts {
    std::string model, p = "1", data, response = "y", out;
    std::optional<double> lambda;
    double tol = 1e-8;
    bool standardize = false;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("fit", "Fit sqrt-lasso, penalized logistic regression or OLS");
  cmd->add_option("--model", o->model, "sqrt-lasso, logistic or ols")
      ->required()
      ->check(CLI::IsMember({"sqrt-lasso", "logistic", "ols"}));
  cmd->add_option("--lambda", o->lambda, "penalty weight");
  cmd->add_option("--p", o->p, "penalty norm, 1 or 2")->capture_default_str();
  cmd->add_option("--data", o->data, "CSV dataset")->required();
  cmd->add_option("--response", o->response, "response column")->capture_default_str();
  cmd->add_option("--out", o->out, "JSON output (default stdout)");
  cmd->add_option("--tol", o->tol, "KKT tolerance")->capture_default_str();
  cmd->add_flag("--standardize", o->standardize, "standardize predictors first");
  cmd->callback([o, &action] {
    const auto p = penalty_flag(o->p);
    if (o->model != "ols" && !o->lambda) usage("--lambda", "required for " + o->model);
    if (o->lambda && *o->lambda < 0.0) usage("--lambda", "must be >= 0");
    action = [o, p] {
      const TaskKind kind = o->model == "logistic" ? TaskKind::binary : TaskKind::regression;
      const auto ds = load_dataset(o->data, o->response, kind, o->standardize);
      solvers::FitOptions fo;
      fo.tol = o->tol;
      solvers::FitResult fit;
      std::string penalty = p == solvers::PenaltyNorm::l1 ? "l1" : "l2";
      if (o->model == "sqrt-lasso") {
        fit = solvers::fit_sqrt_lasso(ds, *o->lambda, p, fo);
      } else if (o->model == "logistic") {
        fit = solvers::fit_logistic_lp(ds, *o->lambda, p, fo);
      } else {
        fit = solvers::fit_ols(ds);
        penalty = "none";
      }
      emit_json(to_json(fit, o->model, penalty), o->out);
    };
  });
}

// worst-case ---------------------------------------------------------------------

void add_worst_case(CLI::App& app, std::function<void()>& action) {
  struct Opts {
    std::string loss, p = "1", data, response = "y", beta_file;
    double delta = 0.0;
    bool numeric = false, barbeta = false;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("worst-case", "Worst-case expected loss over a Wasserstein ball");
  cmd->add_option("--loss", o->loss, "square, logistic or hinge")
      ->required()
      ->check(CLI::IsMember({"square", "logistic", "hinge"}));
  cmd->add_option("--delta", o->delta, "radius")->required();
  cmd->add_option("--p", o->p, "dual norm exponent (1, 2, inf, ...)")->capture_default_str();
  cmd->add_option("--data", o->data, "CSV dataset")->required();
  cmd->add_option("--response", o->response, "response column")->capture_default_str();
  cmd->add_option("--beta-file", o->beta_file, "coefficients")->required();
  cmd->add_flag("--numeric", o->numeric, "square loss through the one-dimensional dual");
  cmd->add_flag("--barbeta", o->barbeta, "square loss under the unmodified cost");
  cmd->callback([o, &action] {
    const Exponent p = exponent_flag(o->p, "--p");
    if (o->delta < 0.0) usage("--delta", "must be >= 0");
    if ((o->numeric || o->barbeta) && o->loss != "square") usage(o->numeric ? "--numeric" : "--barbeta", "square loss only");
    action = [o, p] {
      const TaskKind kind = o->loss == "square" ? TaskKind::regression : TaskKind::binary;
      const auto ds = read_dataset_csv(o->data, o->response, kind);
      const Vector beta = read_beta_file(o->beta_file);
      dro::WorstCase wc;
      if (o->loss == "square") {
        wc = o->numeric ? dro::worstcase_dual_numeric(ds, beta, o->delta, p, o->barbeta)
                        : dro::worstcase_linear_closed(ds, beta, o->delta, p, o->barbeta);
      } else if (o->loss == "logistic") {
        wc = dro::worstcase_logistic_closed(ds, beta, o->delta, p);
      } else {
        wc = dro::worstcase_hinge_closed(ds, beta, o->delta, p);
      }
      emit_json(to_json(wc));
    };
  });
}

// rwp ---------------------------------------------------------------------------

void add_rwp(CLI::App& app, std::function<void()>& action) {
  struct Opts {
    std::string mode, theta, beta_file, data, column, response = "y", q = "2", equation = "linear";
    std::optional<double> rho;
    std::optional<std::uint64_t> seed;
    bool modified = false;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("rwp", "Evaluate the robust Wasserstein profile function");
  cmd->add_option("--mode", o->mode, "mean, linear-q2 or generic")
      ->required()
      ->check(CLI::IsMember({"mean", "linear-q2", "generic"}));
  cmd->add_option("--theta", o->theta, "parameter (comma-separated for vectors)");
  cmd->add_option("--beta-file", o->beta_file, "regression coefficients");
  cmd->add_option("--rho", o->rho, "transport cost power");
  cmd->add_option("--data", o->data, "CSV samples")->required();
  cmd->add_option("--column", o->column, "sample column for the mean equation");
  cmd->add_option("--response", o->response, "response column")->capture_default_str();
  cmd->add_option("--q", o->q, "cost norm for generic mode")->capture_default_str();
  cmd->add_option("--equation", o->equation, "generic mode: mean, linear or logistic")
      ->check(CLI::IsMember({"mean", "linear", "logistic"}))
      ->capture_default_str();
  cmd->add_option("--seed", o->seed, "seed of the generic inner multi-start");
  cmd->add_flag("--modified", o->modified, "hold the response fixed (generic mode)");
  cmd->callback([o, &action] {
    const bool mean_eq = o->mode == "mean" || (o->mode == "generic" && o->equation == "mean");
    if (mean_eq && o->theta.empty()) usage("--theta", "required for the mean equation");
    if (!mean_eq && o->beta_file.empty() && o->theta.empty()) usage("--beta-file", "required for regression equations");
    if (o->mode != "linear-q2" && !o->rho) usage("--rho", "required for mode " + o->mode);
    if (o->mode == "linear-q2" && o->rho && *o->rho != 2.0) usage("--rho", "linear-q2 uses rho = 2");
    if (o->mode == "generic" && !o->seed) usage("--seed", "required for generic mode");
    const Exponent q = exponent_flag(o->q, "--q");
    action = [o, q, mean_eq] {
      profile::RwpValue r;
      auto theta_vec = [&] { return o->beta_file.empty() ? parse_vector(o->theta, "--theta") : read_beta_file(o->beta_file); };
      if (o->mode == "mean") {
        const Vector w = read_column(o->data, o->column);
        const Vector t = parse_vector(o->theta, "--theta");
        if (t.size() != 1) usage("--theta", "mean mode takes one value");
        r = profile::rwp_mean(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())), t[0], *o->rho);
      } else if (o->mode == "linear-q2") {
        const auto ds = read_dataset_csv(o->data, o->response, TaskKind::regression);
        r = profile::rwp_linear_q2(ds, theta_vec());
      } else {
        CostSpec cost;
        cost.q = q;
        cost.rho = *o->rho;
        cost.modified = o->modified;
        profile::GenericDualOptions go;
        go.seed = RngSeed{*o->seed};
        if (mean_eq) {
          const Vector w = read_column(o->data, o->column);
          r = profile::rwp_generic_dual(Matrix(w), EstimatingEquation::mean(), parse_vector(o->theta, "--theta"), cost, go);
        } else {
          const TaskKind kind = o->equation == "logistic" ? TaskKind::binary : TaskKind::regression;
          const auto ds = read_dataset_csv(o->data, o->response, kind);
          Matrix samples(ds.n(), ds.d() + 1);
          samples << ds.x(), ds.y();
          const auto eq = kind == TaskKind::binary ? EstimatingEquation::logistic_regression(ds.d())
                                                   : EstimatingEquation::linear_regression(ds.d());
          r = profile::rwp_generic_dual(samples, eq, theta_vec(), cost, go);
        }
      }
      emit_json(to_json(r));
    };
  });
}

// simulate-limit -------------------------------------------------------------------

void add_simulate_limit(CLI::App& app, std::function<void()>& action) {
  struct Opts {
    std::string law, data, column, response = "y", theta, beta_file, out, p, q = "inf",
                                                                            levels = "0.5,0.9,0.95";
    std::size_t draws = 0, d = 0, saa = 1000;
    std::uint64_t seed = 0;
    std::optional<double> rho, ar, error_factor, sigma;
    int threads = default_threads();
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("simulate-limit", "Sample a limit law and report its quantiles");
  cmd->add_option("--law", o->law, "rbar, rbar1, l1, l2 or l4")
      ->required()
      ->check(CLI::IsMember({"rbar", "rbar1", "l1", "l2", "l4"}));
  cmd->add_option("--draws", o->draws, "number of draws")->required();
  cmd->add_option("--seed", o->seed, "master seed")->required();
  cmd->add_option("--rho", o->rho, "power for rbar");
  cmd->add_option("--p", o->p, "penalty exponent for rbar, rbar1 and l1");
  cmd->add_option("--q", o->q, "norm for l2 and l4")->capture_default_str();
  cmd->add_option("--data", o->data, "CSV samples for plug-in estimates");
  cmd->add_option("--column", o->column, "sample column for the mean equation");
  cmd->add_option("--response", o->response, "response column")->capture_default_str();
  cmd->add_option("--theta", o->theta, "mean-equation parameter");
  cmd->add_option("--beta-file", o->beta_file, "regression coefficients");
  cmd->add_option("--d", o->d, "dimension when no data is given");
  cmd->add_option("--ar", o->ar, "AR coefficient of the covariance when no data is given");
  cmd->add_option("--error-factor", o->error_factor, "l2 factor (default pi/(pi-2))");
  cmd->add_option("--sigma", o->sigma, "l1 error scale (default RMS residual)");
  cmd->add_option("--saa", o->saa, "SAA size")->capture_default_str();
  cmd->add_option("--levels", o->levels, "quantile levels")->capture_default_str();
  cmd->add_option("--out", o->out, "CSV of draws");
  cmd->add_option("--threads", o->threads)->capture_default_str();
  cmd->callback([o, &action] {
    const auto law = limits::parse_law(o->law);
    const bool regression = !o->beta_file.empty();
    if (law == limits::LimitLaw::rbar_rho && !o->rho) usage("--rho", "required for rbar");
    if ((law == limits::LimitLaw::rbar_rho || law == limits::LimitLaw::rbar_one)) {
      if (o->data.empty()) usage("--data", "required for " + o->law);
      if (!regression && o->theta.empty()) usage("--theta", "mean equation needs --theta (or give --beta-file)");
    }
    if (law == limits::LimitLaw::l1 && (o->data.empty() || o->beta_file.empty())) {
      usage(o->data.empty() ? "--data" : "--beta-file", "required for l1");
    }
    if ((law == limits::LimitLaw::l2 || law == limits::LimitLaw::l4) && o->data.empty() && o->d == 0) {
      usage("--d", o->law + " needs --data or --d");
    }
    const Exponent q = exponent_flag(o->q, "--q");
    const Exponent p = o->p.empty() ? (law == limits::LimitLaw::l1 ? dual_exponent(q) : Exponent::finite(2.0))
                                    : exponent_flag(o->p, "--p");
    const Vector levels = parse_vector(o->levels, "--levels");
    for (Eigen::Index i = 0; i < levels.size(); ++i) {
      if (!(levels[i] > 0.0 && levels[i] < 1.0)) usage("--levels", "levels must lie in (0, 1)");
    }
    action = [o, law, q, p, levels, regression] {
      const RngSeed seed{o->seed};
      limits::SolveOptions so;
      so.saa_size = static_cast<Eigen::Index>(o->saa);
      so.threads = o->threads;
      limits::LimitSampleBatch batch;
      switch (law) {
        case limits::LimitLaw::rbar_rho:
        case limits::LimitLaw::rbar_one: {
          Matrix h;
          std::vector<Matrix> dh;
          if (regression) {
            const auto ds = read_dataset_csv(o->data, o->response, TaskKind::regression);
            const Vector beta = read_beta_file(o->beta_file);
            const auto eq = EstimatingEquation::linear_regression(ds.d());
            h.resize(ds.n(), ds.d());
            for (Eigen::Index i = 0; i < ds.n(); ++i) {
              Vector w(ds.d() + 1);
              w << ds.x().row(i).transpose(), ds.y()[i];
              h.row(i) = eq.eval(w, beta).transpose();
              dh.push_back(eq.jacobian(w, beta));
            }
          } else {
            const Vector w = read_column(o->data, o->column);
            const Vector t = parse_vector(o->theta, "--theta");
            h = (w.array() - t[0]).matrix();
            dh.assign(static_cast<std::size_t>(w.size()), Matrix::Ones(1, 1));
          }
          batch = law == limits::LimitLaw::rbar_rho
                      ? limits::sample_rbar(*o->rho, h, dh, p, o->draws, seed, so)
                      : limits::sample_rbar_one(h, dh, p, o->draws, seed, so);
          break;
        }
        case limits::LimitLaw::l1: {
          const auto ds = read_dataset_csv(o->data, o->response, TaskKind::regression);
          const Vector beta = read_beta_file(o->beta_file);
          if (beta.size() != ds.d()) throw Error(ErrorCode::dimension, "--beta-file length differs from d");
          const Vector e = ds.y() - ds.x() * beta;
          const double sigma = o->sigma ? *o->sigma : std::sqrt(e.squaredNorm() / static_cast<double>(e.size()));
          const auto factor = limits::CovarianceFactor::from_covariance(sample_covariance(ds.x()));
          batch = limits::sample_l1(sigma, beta, ds.x(), e, factor, p, o->draws, seed, so);
          break;
        }
        case limits::LimitLaw::l2:
        case limits::LimitLaw::l4: {
          std::optional<limits::CovarianceFactor> factor;
          if (!o->data.empty()) {
            const TaskKind kind = law == limits::LimitLaw::l4 ? TaskKind::binary : TaskKind::regression;
            const auto ds = read_dataset_csv(o->data, o->response, kind);
            factor = law == limits::LimitLaw::l4
                         ? limits::CovarianceFactor::from_covariance(second_moment(ds.x()), "second-moment")
                         : limits::CovarianceFactor::from_covariance(sample_covariance(ds.x()));
          } else {
            factor = ar_or_identity(o->d, o->ar);
          }
          batch = law == limits::LimitLaw::l4
                      ? limits::sample_l4(*factor, q, o->draws, seed, o->threads)
                      : limits::sample_l2(*factor, q, o->error_factor.value_or(limits::normal_error_factor()),
                                          o->draws, seed, o->threads);
          break;
        }
      }
      if (!o->out.empty()) {
        std::ofstream out(o->out);
        if (!out) throw Error(ErrorCode::io, "cannot write " + o->out);
        limits::write_batch_csv(out, batch);
      }
      Json j;
      j["law"] = limits::to_string(batch.law);
      j["draws"] = batch.values.size();
      j["seed"] = o->seed;
      Json meta;
      meta["rho"] = num(batch.meta.rho);
      meta["exponent"] = batch.meta.exponent;
      meta["factor_id"] = batch.meta.factor_id;
      meta["saa_size"] = batch.meta.saa_size;
      if (batch.law == limits::LimitLaw::l2) meta["error_factor"] = num(batch.meta.error_factor);
      meta["not_converged"] = batch.meta.not_converged;
      meta["max_residual"] = num(batch.meta.max_residual);
      j["meta"] = meta;
      Json qs = Json::array();
      if (!batch.values.empty()) {
        for (Eigen::Index i = 0; i < levels.size(); ++i) qs.push_back(to_json(limits::quantile(batch, levels[i])));
      }
      j["quantiles"] = qs;
      emit_json(j);
    };
  });
}

// experiment ---------------------------------------------------------------------

void add_experiment(CLI::App& app, std::function<void()>& action) {
  struct Opts {
    std::string config, rows, out;
    std::optional<int> threads;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("experiment", "Run a simulation or CSV experiment from a config file");
  cmd->add_option("--config", o->config, "key=value config file")->required();
  cmd->add_option("--rows", o->rows, "CSV of per-replication rows");
  cmd->add_option("--out", o->out, "JSON aggregate output (default stdout)");
  cmd->add_option("--threads", o->threads, "worker threads (overrides the config)");
  cmd->callback([o, &action] {
    if (o->threads && *o->threads < 1) usage("--threads", "must be at least 1");
    action = [o] {
      auto cfg = pipeline::load_experiment_config(o->config);
      if (o->threads) cfg.threads = *o->threads;
      const auto report = pipeline::run_experiment(cfg);
      if (!o->rows.empty()) {
        std::ofstream out(o->rows);
        if (!out) throw Error(ErrorCode::io, "cannot write " + o->rows);
        pipeline::write_rows_csv(out, report.rows);
      }
      Json j;
      j["reps"] = cfg.reps;
      j["alpha"] = num(cfg.alpha);
      j["selection"] = pipeline::to_string(cfg.method);
      j["q"] = cfg.q.to_string();
      j["mc_draws"] = cfg.mc_draws;
      j["seed"] = cfg.seed.master;
      j["cv_folds"] = cfg.cv_folds;
      j["cv_grid"] = cfg.cv_grid;
      j["saa_size"] = cfg.saa_size;
      j["scale_response"] = cfg.scale_response;
      j["digest"] = report.digest;
      j["notes"] = report.notes;
      Json aggs = Json::array();
      for (const auto& a : report.aggregates) aggs.push_back(to_json(a));
      j["aggregates"] = aggs;
      emit_json(j, o->out);
    };
  });
}

}  // namespace
}  // namespace rwpi::cli

int main(int argc, char** argv) {
  using namespace rwpi::cli;
  CLI::App app{"Robust Wasserstein profile inference"};
  app.require_subcommand(1);
  std::function<void()> action;
  try {
    add_gen_data(app, action);
    add_select_lambda(app, action);
    add_fit(app, action);
    add_worst_case(app, action);
    add_rwp(app, action);
    add_simulate_limit(app, action);
    add_experiment(app, action);
    if (argc > 1 && argv[1][0] != '-' && app.get_subcommands([&](const CLI::App* sub) {
                                        return sub->get_name() == argv[1];
                                      }).empty()) {
      std::cerr << "usage error: unknown verb '" << argv[1] << "'\n" << app.help();
      return 2;
    }
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const rwpi::Error& e) {
    // flag values rejected by library parsers during validation
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
  try {
    if (action) action();
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const rwpi::Error& e) {
    std::cerr << "error (" << rwpi::to_string(e.code()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
