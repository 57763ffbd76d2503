// Command-line front end: design, fit, predict, sweep-p0, vanderpas, lasso.

#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hsprior/dataset.hpp"
#include "hsprior/error.hpp"
#include "hsprior/experiments.hpp"
#include "hsprior/inference.hpp"
#include "hsprior/io.hpp"
#include "hsprior/lasso.hpp"
#include "hsprior/prior_design.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hsprior;

namespace {

struct CommonOptions {
  std::uint64_t seed = 0;
  std::string out;
  bool timings = false;
  bool serial = false;

  fs::path dir() const { return io::output_directory(out.empty() ? std::nullopt : std::optional(out)); }
  Execution exec() const { return serial ? Execution::serial : Execution::parallel; }
};

struct SamplerOptions {
  int chains = 4;
  int iterations = 1000;
  double warmup_fraction = 0.5;
  double target_accept = 0.99;
  int max_leapfrog = 512;

  SamplerSettings settings(std::uint64_t seed) const {
    SamplerSettings s;
    s.chains = chains;
    s.iterations = iterations;
    s.warmup_fraction = warmup_fraction;
    s.target_accept = target_accept;
    s.max_leapfrog = max_leapfrog;
    s.seed = seed;
    return s;
  }
  json to_json() const {
    return {{"chains", chains},
            {"iterations", iterations},
            {"warmup_fraction", warmup_fraction},
            {"target_accept", target_accept},
            {"max_leapfrog", max_leapfrog}};
  }
};

struct DataOptions {
  std::string path;
  std::string target = "y";
  std::string type = "regression";

  json to_json() const { return {{"data", path}, {"target", target}, {"type", type}}; }
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  cmd->add_option("--out", o.out, "Output directory (default $HSPRIOR_OUTPUT_DIR or hsprior-out)");
  cmd->add_flag("--timings", o.timings, "Record wall-clock times in the outputs");
  cmd->add_flag("--serial", o.serial, "Use the serial reference kernels");
}

void add_sampler(CLI::App* cmd, SamplerOptions& o) {
  cmd->add_option("--chains", o.chains)->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--iterations", o.iterations, "Iterations per chain, warmup included")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--warmup-fraction", o.warmup_fraction)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--target-accept", o.target_accept)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--max-leapfrog", o.max_leapfrog)->capture_default_str()->check(CLI::PositiveNumber);
}

void add_data(CLI::App* cmd, DataOptions& o, bool required) {
  auto* opt = cmd->add_option("--data", o.path, "CSV file with a header row");
  if (required) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--target", o.target, "Target column")->capture_default_str();
  cmd->add_option("--type", o.type, "regression or classification")
      ->capture_default_str()
      ->check(CLI::IsMember({"regression", "classification"}));
}

LikelihoodKind likelihood_for(TargetKind kind) {
  return kind == TargetKind::classification ? LikelihoodKind::bernoulli_logit
                                            : LikelihoodKind::gaussian;
}

std::string file_label(std::string label) {
  for (char& c : label)
    if (c == '(' || c == ')') c = '_';
  while (!label.empty() && label.back() == '_') label.pop_back();
  return label;
}

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_manifest(const CommonOptions& c, const std::string& command, const json& config,
                    std::chrono::steady_clock::time_point start) {
  io::write_file_atomic(c.dir() / "manifest.json",
                        io::dump(io::manifest(command, config, c.seed,
                                              c.timings ? std::optional(elapsed(start)) : std::nullopt)));
}

// ---- design ----

struct DesignOptions {
  long D = 1000;
  long n = 200;
  double sigma = 1.0;
  double p0 = 5.0;
  long draws = kDefaultMeffDraws;
  int bins = kDefaultHistogramBins;
  bool log_bins = false;
};

void run_design(const CommonOptions& c, const DesignOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  MeffReportConfig cfg;
  cfg.D = o.D;
  cfg.n = o.n;
  cfg.sigma = o.sigma;
  cfg.p0 = o.p0;
  cfg.draws = o.draws;
  cfg.bins = o.bins;
  cfg.bin_scale = o.log_bins ? BinScale::log : BinScale::linear;
  cfg.seed = c.seed;
  const MeffReport report = run_meff_prior_report(cfg, c.exec());

  json summary;
  summary["tau0"] = report.tau0;
  summary["priors"] = json::array();
  for (const auto& e : report.entries) {
    json entry = to_json(e.summary);
    entry["label"] = e.label;
    entry["tau_prior"] = e.prior.tau_prior.label();
    entry["mean_se"] = e.mean_se;
    summary["priors"].push_back(entry);
    io::write_file_atomic(c.dir() / ("meff_hist_" + file_label(e.label) + ".csv"),
                          histogram_csv(e.summary));
  }
  io::write_file_atomic(c.dir() / "design.json", io::dump(summary));
  write_manifest(c, "design",
                 {{"D", o.D}, {"n", o.n}, {"sigma", o.sigma}, {"p0", o.p0}, {"draws", o.draws},
                  {"bins", o.bins}, {"log_bins", o.log_bins}},
                 start);
  std::cout << "tau0 = " << io::format_double(report.tau0) << '\n';
  for (const auto& e : report.entries)
    std::cout << e.label << ": E[m_eff] = " << e.summary.mean << " (se " << e.mean_se << ")\n";
}

// ---- fit ----

struct FitOptions {
  DataOptions data;
  SamplerOptions sampler;
  std::optional<double> p0;
  std::string family = "half-cauchy";
  double df = 3.0;
  double intercept_sd = 10.0;
  double test_fraction = 0.0;
};

PriorConfig prior_for(const std::optional<double>& p0, const std::string& family_name, double df,
                      const Dataset& train) {
  const HyperpriorFamily family = parse_family(family_name);
  const bool classification = train.kind == TargetKind::classification;
  if (p0) {
    const DesignScale scale{train.n(), train.D(), classification ? logistic_sigma_plugin() : 1.0};
    return make_prior_config(*p0, scale, family,
                             family == HyperpriorFamily::half_t ? std::optional(df) : std::nullopt,
                             !classification);
  }
  detail::require(family != HyperpriorFamily::fixed, "a fixed tau needs --p0");
  PriorConfig prior;
  prior.tau_prior.family = family;
  prior.tau_prior.scale = 1.0;
  prior.tau_prior.df = family == HyperpriorFamily::half_t ? df : 1.0;
  prior.scale = DesignScale{train.n(), train.D(), 1.0};
  return prior;
}

json standardization_json(const Dataset& d) {
  const auto& s = *d.standardization;
  return {{"features", d.feature_names},
          {"target", d.target_name},
          {"type", d.kind == TargetKind::classification ? "classification" : "regression"},
          {"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
          {"sd", std::vector<double>(s.sd.data(), s.sd.data() + s.sd.size())}};
}

void run_fit(const CommonOptions& c, const FitOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  const Dataset raw = load_csv(o.data.path, o.data.target, parse_target_kind(o.data.type));
  Dataset prepared = o.test_fraction > 0.0 ? split_and_standardize(raw, o.test_fraction, c.seed)
                                           : standardize(raw);
  const Dataset train = prepared.split ? train_part(prepared) : prepared;

  ModelSpec spec;
  spec.likelihood = likelihood_for(train.kind);
  spec.intercept_prior_sd = o.intercept_sd;
  spec.prior = prior_for(o.p0, o.family, o.df, train);
  const FitResult result = fit(spec, train, o.sampler.settings(c.seed), c.exec());
  const PosteriorShrinkage shrink =
      posterior_shrinkage_profile(result.draws, DesignScale{train.n(), train.D(), 1.0});
  std::optional<PredictiveSummary> heldout;
  if (prepared.split) {
    const Dataset test = test_part(prepared);
    heldout = predict(result.draws, test.X, &test.y);
  }

  json report = io::fit_report(result, shrink, heldout, c.timings);
  report["tau_prior"] = spec.prior.tau_prior.label();
  report["tau_coupled_to_sigma"] = spec.prior.couple_tau_to_sigma;
  io::write_file_atomic(c.dir() / "draws.csv", io::draws_csv(result.draws));
  io::write_file_atomic(c.dir() / "fit_report.json", io::dump(report));
  io::write_file_atomic(c.dir() / "standardization.json", io::dump(standardization_json(prepared)));
  json cfg = o.data.to_json();
  cfg["sampler"] = o.sampler.to_json();
  cfg["p0"] = o.p0 ? json(*o.p0) : json();
  cfg["family"] = o.family;
  cfg["df"] = o.df;
  cfg["intercept_sd"] = o.intercept_sd;
  cfg["test_fraction"] = o.test_fraction;
  write_manifest(c, "fit", cfg, start);
  std::cout << "posterior mean m_eff = " << shrink.mean << ", max R-hat = " << result.max_rhat
            << ", divergences = " << result.divergences << '\n';
  if (heldout) std::cout << "test MLPD = " << heldout->mlpd << ", MSE = " << heldout->mse << '\n';
}

// ---- predict ----

struct PredictOptions {
  std::string draws;
  std::string standardization;
  DataOptions data;
};

void run_predict(const CommonOptions& c, const PredictOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  std::ifstream draws_in(o.draws);
  if (!draws_in) throw DataError("cannot open '" + o.draws + "'");
  const PosteriorDraws draws = io::parse_draws_csv(draws_in);
  const json st = json::parse(io::read_file(o.standardization));
  const std::string target = st.at("target").get<std::string>();
  const TargetKind kind = parse_target_kind(st.at("type").get<std::string>());
  const Dataset raw = load_csv(o.data.path, target, kind);
  if (raw.feature_names != st.at("features").get<std::vector<std::string>>())
    throw DataError("prediction data columns differ from the training columns");
  Standardization s;
  const auto mean = st.at("mean").get<std::vector<double>>();
  const auto sd = st.at("sd").get<std::vector<double>>();
  s.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  s.sd = Eigen::Map<const Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
  const Eigen::MatrixXd X = apply_standardization(raw.X, s);
  const PredictiveSummary pred = predict(draws, X, &raw.y);

  std::ostringstream csv;
  csv << "row,mean_prediction,log_predictive\n";
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    csv << i << ',' << io::format_double(pred.mean_prediction(i)) << ','
        << io::format_double(pred.log_predictive(i)) << '\n';
  io::write_file_atomic(c.dir() / "predictions.csv", csv.str());
  io::write_file_atomic(c.dir() / "predict.json",
                        io::dump({{"mlpd", pred.mlpd}, {"mse", pred.mse}, {"n", X.rows()}}));
  write_manifest(c, "predict",
                 {{"draws", o.draws}, {"standardization", o.standardization}, {"data", o.data.path}},
                 start);
  std::cout << "MLPD = " << pred.mlpd << ", MSE = " << pred.mse << '\n';
}

// ---- sweep-p0 ----

struct SweepOptions {
  DataOptions data;
  SamplerOptions sampler;
  std::vector<double> p0{1.0, 5.0, 20.0, 80.0};
  std::vector<std::string> families{"half-normal", "half-cauchy"};
  double df = 3.0;
  int splits = 10;
  double test_fraction = 0.2;
  bool no_lasso = false;
  // synthetic logistic data when --data is absent
  long synth_n = 80;
  long synth_D = 200;
  long synth_p_star = 5;
  double synth_amplitude = 2.0;
};

void run_sweep(const CommonOptions& c, const SweepOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  Dataset data;
  json cfg;
  if (!o.data.path.empty()) {
    data = load_csv(o.data.path, o.data.target, parse_target_kind(o.data.type));
    cfg = o.data.to_json();
  } else {
    data = generate_logistic(o.synth_n, o.synth_D, o.synth_p_star, o.synth_amplitude,
                             derive_seed(c.seed, 0xDA7A))
               .data;
    cfg["synthetic"] = {{"n", o.synth_n},
                        {"D", o.synth_D},
                        {"p_star", o.synth_p_star},
                        {"amplitude", o.synth_amplitude}};
  }
  SweepConfig sc;
  sc.p0_grid = o.p0;
  sc.families.clear();
  for (const auto& f : o.families) sc.families.push_back(parse_family(f));
  sc.half_t_df = o.df;
  sc.splits = o.splits;
  sc.test_fraction = o.test_fraction;
  sc.sampler = o.sampler.settings(c.seed);
  sc.lasso_baseline = !o.no_lasso;
  sc.seed = c.seed;
  const ExperimentResult result = run_p0_sweep(data, sc, c.exec());

  io::write_file_atomic(c.dir() / "sweep_rows.csv", io::sweep_rows_csv(result, c.timings));
  io::write_file_atomic(c.dir() / "sweep_records.csv", io::sweep_records_csv(result, c.timings));
  cfg["sampler"] = o.sampler.to_json();
  cfg["p0"] = o.p0;
  cfg["families"] = o.families;
  cfg["df"] = o.df;
  cfg["splits"] = o.splits;
  cfg["test_fraction"] = o.test_fraction;
  cfg["lasso_baseline"] = !o.no_lasso;
  write_manifest(c, "sweep-p0", cfg, start);
  std::cout << io::sweep_rows_csv(result, false);
}

// ---- vanderpas ----

struct VanderpasOptions {
  SamplerOptions sampler;
  long n = 100;
  std::vector<long> p_star{5};
  std::vector<double> A{2.0, 4.0, 6.0, 8.0, 10.0};
  int reps = 20;
};

void run_vanderpas(const CommonOptions& c, const VanderpasOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  VanderpasConfig vc;
  vc.n = o.n;
  vc.p_star = o.p_star;
  vc.amplitudes = o.A;
  vc.replications = o.reps;
  vc.sampler = o.sampler.settings(c.seed);
  vc.seed = c.seed;
  const VanderpasResult result = run_vanderpas_experiment(vc, c.exec());
  io::write_file_atomic(c.dir() / "vanderpas_cells.csv", io::vanderpas_cells_csv(result));
  io::write_file_atomic(c.dir() / "vanderpas_records.csv",
                        io::vanderpas_records_csv(result, c.timings));
  write_manifest(c, "vanderpas",
                 {{"n", o.n}, {"p_star", o.p_star}, {"A", o.A}, {"reps", o.reps},
                  {"sampler", o.sampler.to_json()}},
                 start);
  std::cout << io::vanderpas_cells_csv(result);
}

// ---- lasso ----

struct LassoCliOptions {
  DataOptions data;
  int folds = 10;
  int grid = 100;
  double test_fraction = 0.0;
};

void run_lasso(const CommonOptions& c, const LassoCliOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  const Dataset raw = load_csv(o.data.path, o.data.target, parse_target_kind(o.data.type));
  const Dataset prepared = o.test_fraction > 0.0 ? split_and_standardize(raw, o.test_fraction, c.seed)
                                                 : standardize(raw);
  const Dataset train = prepared.split ? train_part(prepared) : prepared;
  const LikelihoodKind kind = likelihood_for(train.kind);
  const LassoCvResult cv = lasso_cv(train, kind, o.folds, o.grid, c.seed);

  json out = to_json(cv.fit);
  out["selected_index"] = cv.selected;
  if (prepared.split) {
    const Dataset test = test_part(prepared);
    out["heldout"] = {{"mlpd", lasso_mlpd(cv.fit, kind, test.X, test.y)},
                      {"deviance", lasso_deviance(cv.fit, kind, test.X, test.y)}};
  }
  std::ostringstream csv;
  csv << "penalty,cv_deviance\n";
  for (std::size_t k = 0; k < cv.penalties.size(); ++k)
    csv << io::format_double(cv.penalties[k]) << ',' << io::format_double(cv.cv_deviance[k]) << '\n';
  io::write_file_atomic(c.dir() / "lasso_fit.json", io::dump(out));
  io::write_file_atomic(c.dir() / "lasso_cv.csv", csv.str());
  json cfg = o.data.to_json();
  cfg["folds"] = o.folds;
  cfg["grid"] = o.grid;
  cfg["test_fraction"] = o.test_fraction;
  write_manifest(c, "lasso", cfg, start);
  std::cout << "penalty = " << cv.fit.penalty << ", p_lasso = " << cv.fit.p_lasso;
  if (cv.fit.noise_variance) std::cout << ", noise variance = " << *cv.fit.noise_variance;
  std::cout << '\n';
}

int report_error(const std::string& command, const std::string& type, const std::string& message,
                 int code) {
  json err = {{"error", {{"command", command}, {"type", type}, {"message", message}, {"exit_code", code}}}};
  std::cerr << err.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Horseshoe prior design, sampling and baselines"};
  app.set_version_flag("--version", HSPRIOR_VERSION);
  app.set_config("--config", "", "TOML/INI file overriding defaults ([subcommand] sections)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  CommonOptions common;
  DesignOptions design;
  FitOptions fit_opts;
  PredictOptions predict_opts;
  SweepOptions sweep;
  VanderpasOptions vanderpas;
  LassoCliOptions lasso;

  auto* design_cmd = app.add_subcommand("design", "tau0 and prior m_eff report");
  add_common(design_cmd, common);
  design_cmd->add_option("--D", design.D, "Number of predictors")->capture_default_str();
  design_cmd->add_option("--n", design.n, "Number of observations")->capture_default_str();
  design_cmd->add_option("--sigma", design.sigma)->capture_default_str();
  design_cmd->add_option("--p0", design.p0, "Prior guess of relevant predictors")->capture_default_str();
  design_cmd->add_option("--draws", design.draws)->capture_default_str();
  design_cmd->add_option("--bins", design.bins)->capture_default_str();
  design_cmd->add_flag("--log-bins", design.log_bins);

  auto* fit_cmd = app.add_subcommand("fit", "Fit a horseshoe regression to a CSV file");
  add_common(fit_cmd, common);
  add_data(fit_cmd, fit_opts.data, true);
  add_sampler(fit_cmd, fit_opts.sampler);
  fit_cmd->add_option("--p0", fit_opts.p0, "Prior guess; omit for tau ~ family(1)");
  fit_cmd->add_option("--family", fit_opts.family, "fixed, half-normal, half-cauchy or half-t")
      ->capture_default_str();
  fit_cmd->add_option("--df", fit_opts.df, "Degrees of freedom for half-t")->capture_default_str();
  fit_cmd->add_option("--intercept-sd", fit_opts.intercept_sd)->capture_default_str();
  fit_cmd->add_option("--test-fraction", fit_opts.test_fraction, "Hold out this fraction (0 = none)")
      ->capture_default_str();

  auto* predict_cmd = app.add_subcommand("predict", "Score new data with saved draws");
  add_common(predict_cmd, common);
  predict_cmd->add_option("--draws", predict_opts.draws, "draws.csv from fit")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--standardization", predict_opts.standardization,
                          "standardization.json from fit")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--data", predict_opts.data.path, "CSV with the training columns")
      ->required()
      ->check(CLI::ExistingFile);

  auto* sweep_cmd = app.add_subcommand("sweep-p0", "MLPD and m_eff across a p0 grid");
  add_common(sweep_cmd, common);
  add_data(sweep_cmd, sweep.data, false);
  add_sampler(sweep_cmd, sweep.sampler);
  sweep_cmd->add_option("--p0", sweep.p0)->capture_default_str();
  sweep_cmd->add_option("--families", sweep.families)->capture_default_str();
  sweep_cmd->add_option("--df", sweep.df)->capture_default_str();
  sweep_cmd->add_option("--splits", sweep.splits)->capture_default_str();
  sweep_cmd->add_option("--test-fraction", sweep.test_fraction)->capture_default_str();
  sweep_cmd->add_flag("--no-lasso", sweep.no_lasso);
  sweep_cmd->add_option("--synth-n", sweep.synth_n)->capture_default_str();
  sweep_cmd->add_option("--synth-D", sweep.synth_D)->capture_default_str();
  sweep_cmd->add_option("--synth-p-star", sweep.synth_p_star)->capture_default_str();
  sweep_cmd->add_option("--synth-amplitude", sweep.synth_amplitude)->capture_default_str();

  auto* vdp_cmd = app.add_subcommand("vanderpas", "Normal-means MSE experiment");
  add_common(vdp_cmd, common);
  add_sampler(vdp_cmd, vanderpas.sampler);
  vdp_cmd->add_option("--n", vanderpas.n)->capture_default_str();
  vdp_cmd->add_option("--p-star", vanderpas.p_star)->capture_default_str();
  vdp_cmd->add_option("--A", vanderpas.A)->capture_default_str();
  vdp_cmd->add_option("--reps", vanderpas.reps)->capture_default_str();

  auto* lasso_cmd = app.add_subcommand("lasso", "Cross-validated LASSO baseline");
  add_common(lasso_cmd, common);
  add_data(lasso_cmd, lasso.data, true);
  lasso_cmd->add_option("--folds", lasso.folds)->capture_default_str();
  lasso_cmd->add_option("--grid", lasso.grid)->capture_default_str();
  lasso_cmd->add_option("--test-fraction", lasso.test_fraction)->capture_default_str();

  std::string command = "hsprior";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ConfigError& e) {
    return report_error(command, "config", e.what(), 2);
  } catch (const CLI::FileError& e) {
    return report_error(command, "config", e.what(), 2);
  } catch (const CLI::ParseError& e) {
    return report_error(command, "usage", e.what(), 2);
  }

  try {
    if (*design_cmd) {
      command = "design";
      run_design(common, design);
    } else if (*fit_cmd) {
      command = "fit";
      run_fit(common, fit_opts);
    } else if (*predict_cmd) {
      command = "predict";
      run_predict(common, predict_opts);
    } else if (*sweep_cmd) {
      command = "sweep-p0";
      run_sweep(common, sweep);
    } else if (*vdp_cmd) {
      command = "vanderpas";
      run_vanderpas(common, vanderpas);
    } else if (*lasso_cmd) {
      command = "lasso";
      run_lasso(common, lasso);
    }
  } catch (const std::invalid_argument& e) {
    return report_error(command, "invalid_argument", e.what(), 2);
  } catch (const DataError& e) {
    return report_error(command, "data", e.what(), 3);
  } catch (const NumericalError& e) {
    return report_error(command, "numerical", e.what(), 4);
  } catch (const SamplerError& e) {
    return report_error(command, "sampler", e.what(), 4);
  } catch (const json::exception& e) {
    return report_error(command, "config", e.what(), 2);
  } catch (const std::exception& e) {
    return report_error(command, "runtime", e.what(), 1);
  }
  return 0;
}
