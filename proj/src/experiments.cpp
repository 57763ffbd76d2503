#include "hsprior/experiments.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>

#include "hsprior/error.hpp"

namespace hsprior {
namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string family_label(HyperpriorFamily family, double df) {
  if (family == HyperpriorFamily::half_t) return "half-t(" + std::to_string(static_cast<int>(df)) + ")";
  return std::string(to_string(family));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over (seed, index)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::pair<double, double> mean_and_se(const std::vector<double>& values) {
  if (values.empty()) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double n = static_cast<double>(values.size());
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

MeffReport run_meff_prior_report(const MeffReportConfig& config, Execution exec) {
  DesignScale scale{config.n, config.D, config.sigma};
  scale.validate();
  detail::require(config.draws >= 2, "m_eff report needs at least two draws");
  MeffReport report;

  std::vector<std::pair<std::string, PriorConfig>> menu;
  if (config.p0 > 0.0 && config.p0 < static_cast<double>(config.D)) {
    report.tau0 = tau_reference(config.p0, scale);
    menu.emplace_back("fixed(tau0)", make_prior_config(config.p0, scale, HyperpriorFamily::fixed));
    menu.emplace_back("half-normal(tau0)",
                      make_prior_config(config.p0, scale, HyperpriorFamily::half_normal));
    menu.emplace_back("half-cauchy(tau0)",
                      make_prior_config(config.p0, scale, HyperpriorFamily::half_cauchy));
  } else {
    throw std::invalid_argument("m_eff report: p0 must satisfy 0 < p0 < D");
  }
  PriorConfig unit;
  unit.tau_prior = HyperpriorSpec::half_cauchy(1.0);
  unit.scale = scale;
  menu.emplace_back("half-cauchy(1)", unit);

  for (std::size_t k = 0; k < menu.size(); ++k) {
    MeffReportEntry entry;
    entry.label = menu[k].first;
    entry.prior = menu[k].second;
    const auto sample = sample_meff_prior(entry.prior, config.draws, derive_seed(config.seed, k), exec);
    entry.summary = summarize_meff(sample, config.D, config.bins, config.bin_scale);
    entry.mean_se = std::sqrt(entry.summary.variance / static_cast<double>(config.draws));
    report.entries.push_back(std::move(entry));
  }
  return report;
}

VanderpasResult run_vanderpas_experiment(const VanderpasConfig& config, Execution exec) {
  detail::require(config.n >= 2, "vanderpas: n must be >= 2");
  detail::require(config.replications >= 1, "vanderpas: replications must be >= 1");
  detail::require(!config.p_star.empty() && !config.amplitudes.empty(),
                  "vanderpas: empty p_star or amplitude grid");
  for (long p : config.p_star)
    detail::require(p > 0 && p < config.n, "vanderpas: p_star must satisfy 0 < p_star < n");
  config.sampler.validate();

  const std::vector<std::string> priors{kOraclePrior, kHalfCauchyOnePrior};
  const DesignScale identity{1, config.n, 1.0};
  const long NP = static_cast<long>(config.p_star.size());
  const long NA = static_cast<long>(config.amplitudes.size());
  const long R = config.replications;
  const long NQ = static_cast<long>(priors.size());
  const long tasks = NP * NA * R * NQ;

  VanderpasResult result;
  result.records.resize(static_cast<std::size_t>(tasks));
  kernels::for_each_task(exec, tasks, [&](long t) {
    const long q = t % NQ;
    const long r = (t / NQ) % R;
    const long a = (t / (NQ * R)) % NA;
    const long p = t / (NQ * R * NA);
    const long data_index = (p * NA + a) * R + r;
    VanderpasRecord& rec = result.records[static_cast<std::size_t>(t)];
    rec.prior = priors[static_cast<std::size_t>(q)];
    rec.p_star = config.p_star[static_cast<std::size_t>(p)];
    rec.amplitude = config.amplitudes[static_cast<std::size_t>(a)];
    rec.replication = static_cast<int>(r);
    const auto start = std::chrono::steady_clock::now();
    try {
      const SyntheticProblem problem = generate_normal_means(
          config.n, rec.p_star, rec.amplitude,
          derive_seed(config.seed, static_cast<std::uint64_t>(2 * data_index)));
      ModelSpec spec;
      spec.likelihood = LikelihoodKind::gaussian;
      spec.include_intercept = false;
      if (q == 0) {
        spec.prior = make_prior_config(static_cast<double>(rec.p_star), identity,
                                       HyperpriorFamily::fixed, std::nullopt, true);
      } else {
        spec.prior.tau_prior = HyperpriorSpec::half_cauchy(1.0);
        spec.prior.scale = identity;
      }
      SamplerSettings settings = config.sampler;
      settings.seed = derive_seed(config.seed, static_cast<std::uint64_t>(2 * data_index + 1));
      const FitResult fitted = fit(spec, problem.data, settings, Execution::serial);
      const Eigen::VectorXd post_mean = fitted.draws.beta.colwise().mean().transpose();
      rec.mse = (post_mean - problem.beta).squaredNorm() / static_cast<double>(config.n);
      rec.posterior_mean_meff = posterior_shrinkage_profile(fitted.draws, identity).mean;
      rec.max_rhat = fitted.max_rhat;
      rec.divergences = fitted.divergences;
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    rec.wall_seconds = seconds_since(start);
  });

  for (long q = 0; q < NQ; ++q)
    for (long p = 0; p < NP; ++p)
      for (long a = 0; a < NA; ++a) {
        VanderpasCell cell;
        cell.prior = priors[static_cast<std::size_t>(q)];
        cell.p_star = config.p_star[static_cast<std::size_t>(p)];
        cell.amplitude = config.amplitudes[static_cast<std::size_t>(a)];
        std::vector<double> mses;
        for (long r = 0; r < R; ++r) {
          const auto& rec = result.records[static_cast<std::size_t>(((p * NA + a) * R + r) * NQ + q)];
          if (rec.ok) {
            mses.push_back(rec.mse);
            ++cell.completed;
          } else {
            ++cell.failed;
          }
        }
        std::tie(cell.mean_mse, cell.se_mse) = mean_and_se(mses);
        result.cells.push_back(cell);
      }
  return result;
}

ExperimentResult run_p0_sweep(const Dataset& data, const SweepConfig& config, Execution exec) {
  detail::require(config.splits >= 1, "sweep: splits must be >= 1");
  detail::require(!config.p0_grid.empty() && !config.families.empty(), "sweep: empty grid");
  detail::require(config.test_fraction > 0.0 && config.test_fraction < 1.0,
                  "sweep: test_fraction must lie in (0, 1)");
  for (double p0 : config.p0_grid)
    detail::require(p0 > 0.0 && p0 < static_cast<double>(data.D()),
                    "sweep: every p0 must satisfy 0 < p0 < D");
  for (auto f : config.families)
    detail::require(f != HyperpriorFamily::fixed, "sweep: families must be proper hyperpriors");
  config.sampler.validate();

  const bool classification = data.kind == TargetKind::classification;
  const LikelihoodKind likelihood =
      classification ? LikelihoodKind::bernoulli_logit : LikelihoodKind::gaussian;

  // Splits are shared by every prior so comparisons are paired.
  std::vector<Dataset> train(static_cast<std::size_t>(config.splits));
  std::vector<Dataset> test(static_cast<std::size_t>(config.splits));
  for (int s = 0; s < config.splits; ++s) {
    const Dataset split = split_and_standardize(
        data, config.test_fraction, derive_seed(config.seed, static_cast<std::uint64_t>(s)));
    train[static_cast<std::size_t>(s)] = train_part(split);
    test[static_cast<std::size_t>(s)] = test_part(split);
  }

  const long NF = static_cast<long>(config.families.size());
  const long NP = static_cast<long>(config.p0_grid.size());
  const long per_split = NF * NP + (config.lasso_baseline ? 1 : 0);
  const long tasks = per_split * config.splits;

  ExperimentResult result;
  result.records.resize(static_cast<std::size_t>(tasks));
  kernels::for_each_task(exec, tasks, [&](long t) {
    const long s = t / per_split, k = t % per_split;
    const Dataset& tr = train[static_cast<std::size_t>(s)];
    const Dataset& te = test[static_cast<std::size_t>(s)];
    SweepRecord& rec = result.records[static_cast<std::size_t>(t)];
    rec.split = static_cast<int>(s);
    const auto start = std::chrono::steady_clock::now();
    const bool is_lasso = k == NF * NP;
    if (is_lasso) {
      rec.prior = "lasso";
      rec.p0 = std::numeric_limits<double>::quiet_NaN();
    } else {
      rec.prior = family_label(config.families[static_cast<std::size_t>(k / NP)], config.half_t_df);
      rec.p0 = config.p0_grid[static_cast<std::size_t>(k % NP)];
    }
    try {
      if (is_lasso) {
        const auto cv = lasso_cv(tr, likelihood, config.lasso_folds, 100,
                                 derive_seed(config.seed, static_cast<std::uint64_t>(1000000 + t)));
        rec.posterior_mean_meff = static_cast<double>(cv.fit.p_lasso);
        rec.mlpd = lasso_mlpd(cv.fit, likelihood, te.X, te.y);
        Eigen::VectorXd f = te.X * cv.fit.coefficients;
        f.array() += cv.fit.intercept;
        if (classification) f = f.unaryExpr([](double v) { return logistic(v); });
        rec.mse = (te.y - f).squaredNorm() / static_cast<double>(te.n());
      } else {
        const HyperpriorFamily family = config.families[static_cast<std::size_t>(k / NP)];
        const std::optional<double> df =
            family == HyperpriorFamily::half_t ? std::optional<double>(config.half_t_df) : std::nullopt;
        ModelSpec spec;
        spec.likelihood = likelihood;
        const DesignScale scale{tr.n(), tr.D(), classification ? logistic_sigma_plugin() : 1.0};
        spec.prior = make_prior_config(rec.p0, scale, family, df, !classification);
        SamplerSettings settings = config.sampler;
        settings.seed = derive_seed(config.seed, static_cast<std::uint64_t>(1000000 + t));
        const FitResult fitted = fit(spec, tr, settings, Execution::serial);
        const DesignScale profile_scale{tr.n(), tr.D(), 1.0};
        rec.posterior_mean_meff = posterior_shrinkage_profile(fitted.draws, profile_scale).mean;
        const PredictiveSummary pred = predict(fitted.draws, te.X, &te.y);
        rec.mlpd = pred.mlpd;
        rec.mse = pred.mse;
        rec.max_rhat = fitted.max_rhat;
        rec.divergences = fitted.divergences;
      }
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    rec.wall_seconds = seconds_since(start);
  });

  for (long k = 0; k < per_split; ++k) {
    ExperimentRow row;
    row.prior = result.records[static_cast<std::size_t>(k)].prior;
    row.p0 = result.records[static_cast<std::size_t>(k)].p0;
    std::vector<double> meff, mlpd, mse;
    for (int s = 0; s < config.splits; ++s) {
      const auto& rec = result.records[static_cast<std::size_t>(s * per_split + k)];
      if (!rec.ok) {
        ++row.failed;
        continue;
      }
      ++row.completed;
      meff.push_back(rec.posterior_mean_meff);
      mlpd.push_back(rec.mlpd);
      mse.push_back(rec.mse);
      row.wall_seconds += rec.wall_seconds;
      row.divergences += rec.divergences;
    }
    row.mean_meff = mean_and_se(meff).first;
    std::tie(row.mlpd, row.mlpd_se) = mean_and_se(mlpd);
    row.mse = mean_and_se(mse).first;
    if (row.completed > 0) row.wall_seconds /= row.completed;
    result.rows.push_back(row);
  }
  return result;
}

}  // namespace hsprior
