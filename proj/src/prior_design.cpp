#include "hsprior/prior_design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hsprior/error.hpp"
#include "hsprior/stats.hpp"

namespace hsprior {

PriorConfig make_prior_config(double p0, const DesignScale& scale, HyperpriorFamily family,
                              std::optional<double> df, bool couple_tau_to_sigma) {
  scale.validate();
  if (!(p0 > 0.0 && p0 < static_cast<double>(scale.D)))
    throw std::invalid_argument("make_prior_config: p0 must satisfy 0 < p0 < D");
  DesignScale reference = scale;
  if (couple_tau_to_sigma) reference.sigma = 1.0;

  PriorConfig config;
  config.tau_prior.family = family;
  config.tau_prior.scale = tau_reference(p0, reference);
  config.tau_prior.df = family == HyperpriorFamily::half_t ? df.value_or(1.0) : 1.0;
  config.tau_prior.validate();
  config.lambda_prior = HyperpriorSpec::half_cauchy(1.0);
  config.p0 = p0;
  config.scale = scale;
  config.couple_tau_to_sigma = couple_tau_to_sigma;
  return config;
}

MeffPriorSample sample_meff_prior(const PriorConfig& config, long num_draws, std::uint64_t seed,
                                  Execution exec) {
  detail::require(num_draws >= 1, "sample_meff_prior: num_draws must be >= 1");
  config.scale.validate();
  config.tau_prior.validate();
  config.lambda_prior.validate();

  kernels::MeffKernelArgs args;
  args.tau_prior = config.tau_prior_given_sigma(config.scale.sigma);
  args.lambda_prior = config.lambda_prior;
  args.scale = config.scale;
  args.seed = seed;

  MeffPriorSample out;
  out.draws.resize(static_cast<std::size_t>(num_draws));
  out.tau_draws.resize(static_cast<std::size_t>(num_draws));
  kernels::sample_meff(exec, args, out.draws, out.tau_draws);
  return out;
}

MeffSummary summarize_meff(const MeffPriorSample& sample, long D, int bins, BinScale bin_scale) {
  if (sample.draws.empty()) throw std::invalid_argument("summarize_meff: empty sample");
  detail::require(bins >= 1, "summarize_meff: bins must be >= 1");
  detail::require(D >= 1, "summarize_meff: D must be >= 1");
  const double upper = static_cast<double>(D);

  std::vector<double> edges;
  if (bin_scale == BinScale::linear) {
    for (int b = 0; b <= bins; ++b) edges.push_back(upper * b / bins);
  } else {
    edges.push_back(0.0);
    if (bins > 1) {
      const double lf = std::log(upper * 1e-4), lu = std::log(upper);
      for (int b = 0; b < bins - 1; ++b) edges.push_back(std::exp(lf + (lu - lf) * b / (bins - 1)));
    }
    edges.push_back(upper);
  }

  MeffSummary summary;
  const std::size_t nb = edges.size() - 1;
  summary.histogram.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) summary.histogram[b] = {edges[b], edges[b + 1], 0};
  for (double v : sample.draws) {
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    std::size_t b = it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin()) - 1;
    b = std::min(b, nb - 1);
    ++summary.histogram[b].count;
  }

  std::vector<double> sorted = sample.draws;
  std::sort(sorted.begin(), sorted.end());
  for (double p : {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99})
    summary.quantiles.emplace_back(p, stats::quantile_sorted(sorted, p));
  summary.median = stats::quantile_sorted(sorted, 0.5);
  summary.mean = stats::mean(sample.draws);
  summary.variance = sample.draws.size() > 1 ? stats::variance(sample.draws) : 0.0;
  summary.num_draws = static_cast<long>(sample.draws.size());
  return summary;
}

std::string histogram_csv(const MeffSummary& summary) {
  std::ostringstream os;
  os.precision(17);
  os << "bin_left,bin_right,count\n";
  for (const auto& b : summary.histogram) os << b.left << ',' << b.right << ',' << b.count << '\n';
  return os.str();
}

nlohmann::json to_json(const MeffSummary& summary) {
  nlohmann::json q = nlohmann::json::object();
  for (const auto& [p, v] : summary.quantiles) {
    std::ostringstream key;
    key << p * 100 << '%';
    q[key.str()] = v;
  }
  return {{"mean", summary.mean},
          {"var", summary.variance},
          {"median", summary.median},
          {"num_draws", summary.num_draws},
          {"quantiles", q}};
}

}  // namespace hsprior
