#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsprior/dataset.hpp"
#include "hsprior/inference.hpp"
#include "hsprior/lasso.hpp"
#include "hsprior/prior_design.hpp"

namespace hsprior {

/// Child seed for sub-task `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// ---- prior m_eff report ----------------------------------------------------

struct MeffReportConfig {
  long D = 10;
  long n = 100;
  double sigma = 1.0;
  double p0 = 5.0;
  long draws = kDefaultMeffDraws;
  int bins = kDefaultHistogramBins;
  BinScale bin_scale = BinScale::linear;
  std::uint64_t seed = 0;
};

struct MeffReportEntry {
  std::string label;  // e.g. "half-cauchy(tau0)"
  PriorConfig prior;
  MeffSummary summary;
  double mean_se = 0.0;  // Monte Carlo standard error of the mean
};

struct MeffReport {
  double tau0 = 0.0;
  std::vector<MeffReportEntry> entries;
};

/// Prior m_eff for tau fixed at tau0, half-normal(tau0), half-Cauchy(tau0)
/// and half-Cauchy(1).
MeffReport run_meff_prior_report(const MeffReportConfig& config,
                                 Execution exec = Execution::parallel);

// ---- normal-means experiment -----------------------------------------------

struct VanderpasConfig {
  long n = 100;
  std::vector<long> p_star{5};
  std::vector<double> amplitudes{2.0, 4.0, 6.0, 8.0, 10.0};
  int replications = 20;
  SamplerSettings sampler;
  std::uint64_t seed = 0;
};

inline constexpr const char* kOraclePrior = "oracle-tau0";
inline constexpr const char* kHalfCauchyOnePrior = "half-cauchy-1";

struct VanderpasRecord {
  std::string prior;
  long p_star = 0;
  double amplitude = 0.0;
  int replication = 0;
  bool ok = false;
  std::string error;
  double mse = 0.0;  // mean over coordinates of (posterior mean - truth)^2
  double posterior_mean_meff = 0.0;
  double max_rhat = 0.0;
  long divergences = 0;
  double wall_seconds = 0.0;
};

struct VanderpasCell {
  std::string prior;
  long p_star = 0;
  double amplitude = 0.0;
  double mean_mse = 0.0;
  double se_mse = 0.0;
  int completed = 0;
  int failed = 0;
};

struct VanderpasResult {
  std::vector<VanderpasRecord> records;  // ordered by (p_star, A, replication, prior)
  std::vector<VanderpasCell> cells;      // ordered by (prior, p_star, A)
};

/// Oracle prior: tau = p*/(n - p*) * sigma with sigma ~ 1/sigma^2; baseline
/// tau ~ half-Cauchy(0, 1). Both priors see the same data in each
/// replication. Failed fits are recorded, not thrown.
VanderpasResult run_vanderpas_experiment(const VanderpasConfig& config,
                                         Execution exec = Execution::parallel);

// ---- p0 sweep ---------------------------------------------------------------

struct SweepConfig {
  std::vector<double> p0_grid{1.0, 5.0, 20.0, 80.0};
  std::vector<HyperpriorFamily> families{HyperpriorFamily::half_normal,
                                         HyperpriorFamily::half_cauchy};
  double half_t_df = 3.0;  // used when half_t is listed
  int splits = 10;
  double test_fraction = 0.2;
  SamplerSettings sampler;
  bool lasso_baseline = true;
  int lasso_folds = 10;
  std::uint64_t seed = 0;
};

struct SweepRecord {
  std::string prior;  // family label or "lasso"
  double p0 = 0.0;    // NaN for the lasso baseline
  int split = 0;
  bool ok = false;
  std::string error;
  double posterior_mean_meff = 0.0;  // p_lasso for the lasso baseline
  double mlpd = 0.0;
  double mse = 0.0;
  double max_rhat = 0.0;
  long divergences = 0;
  double wall_seconds = 0.0;
};

struct ExperimentRow {
  std::string prior;
  double p0 = 0.0;
  double mean_meff = 0.0;
  double mlpd = 0.0;
  double mlpd_se = 0.0;  // across splits
  double mse = 0.0;
  double wall_seconds = 0.0;
  long divergences = 0;
  int completed = 0;
  int failed = 0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;       // ordered by (family, p0), lasso last
  std::vector<SweepRecord> records;      // ordered by (split, family, p0)
};

/// Fits every (family, p0) on each split's training part and scores the test
/// part. Splits are shared by all priors.
ExperimentResult run_p0_sweep(const Dataset& data, const SweepConfig& config,
                              Execution exec = Execution::parallel);

/// Mean and standard error across values.
std::pair<double, double> mean_and_se(const std::vector<double>& values);

}  // namespace hsprior
