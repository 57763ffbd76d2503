#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hsprior/distributions.hpp"
#include "hsprior/kernels.hpp"
#include "hsprior/shrinkage_math.hpp"

namespace hsprior {

/// Hyperpriors for the global and local scales.
///
/// With `couple_tau_to_sigma` the effective prior scale of tau is
/// `tau_prior.scale * sigma` for the current noise deviation sigma, which is
/// how the regression models keep the m_eff prior invariant to the noise level.
struct PriorConfig {
  HyperpriorSpec tau_prior = HyperpriorSpec::half_cauchy(1.0);
  HyperpriorSpec lambda_prior = HyperpriorSpec::half_cauchy(1.0);
  std::optional<double> p0;
  DesignScale scale;
  bool couple_tau_to_sigma = false;

  /// Prior on tau for a given sigma.
  HyperpriorSpec tau_prior_given_sigma(double sigma) const {
    return couple_tau_to_sigma ? tau_prior.rescaled(sigma) : tau_prior;
  }
};

/// Builds the tau hyperprior whose scale is tau0(p0). When coupled, the stored
/// scale excludes sigma (it is multiplied back in by the model).
PriorConfig make_prior_config(double p0, const DesignScale& scale, HyperpriorFamily family,
                              std::optional<double> df = std::nullopt,
                              bool couple_tau_to_sigma = false);

struct MeffPriorSample {
  std::vector<double> draws;
  std::vector<double> tau_draws;
};

inline constexpr long kDefaultMeffDraws = 100000;

MeffPriorSample sample_meff_prior(const PriorConfig& config, long num_draws, std::uint64_t seed,
                                  Execution exec = Execution::parallel);

enum class BinScale { linear, log };

struct HistogramBin {
  double left;
  double right;
  long count;
};

struct MeffSummary {
  std::vector<HistogramBin> histogram;
  std::vector<std::pair<double, double>> quantiles;  // (probability, value)
  double mean = 0.0;
  double variance = 0.0;
  double median = 0.0;
  long num_draws = 0;
};

inline constexpr int kDefaultHistogramBins = 50;

/// Histogram over [0, D] plus the 1/5/25/50/75/95/99% quantiles.
/// Log bins start at D * 1e-4 with a leading [0, D * 1e-4) bin.
MeffSummary summarize_meff(const MeffPriorSample& sample, long D, int bins = kDefaultHistogramBins,
                           BinScale bin_scale = BinScale::linear);

std::string histogram_csv(const MeffSummary& summary);
nlohmann::json to_json(const MeffSummary& summary);

}  // namespace hsprior
