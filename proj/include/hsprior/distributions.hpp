#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>

namespace hsprior {

/// xoshiro256** generator with jump-ahead streams.
///
/// Stream `k` of a seed is the seeded state advanced by k jumps of 2^128
/// outputs, so streams of the same seed never overlap in practice. Models
/// UniformRandomBitGenerator, so it plugs into <random> distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double on the open interval (0, 1).
  double uniform_open();
  double standard_normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void jump();

  std::array<std::uint64_t, 4> s_{};
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

enum class HyperpriorFamily { fixed, half_normal, half_cauchy, half_t };

std::string_view to_string(HyperpriorFamily family);
HyperpriorFamily parse_family(std::string_view name);

/// Prior on a positive scale parameter. `fixed` is a point mass at `scale`;
/// half-Cauchy is half-t with df = 1.
struct HyperpriorSpec {
  HyperpriorFamily family = HyperpriorFamily::half_cauchy;
  double scale = 1.0;
  double df = 1.0;

  static HyperpriorSpec fixed(double value) { return {HyperpriorFamily::fixed, value, 1.0}; }
  static HyperpriorSpec half_normal(double s) { return {HyperpriorFamily::half_normal, s, 1.0}; }
  static HyperpriorSpec half_cauchy(double s) { return {HyperpriorFamily::half_cauchy, s, 1.0}; }
  static HyperpriorSpec half_t(double s, double nu) { return {HyperpriorFamily::half_t, s, nu}; }

  /// Same family with the scale multiplied by `factor`.
  HyperpriorSpec rescaled(double factor) const { return {family, scale * factor, df}; }

  void validate() const;
  std::string label() const;
};

double sample(const HyperpriorSpec& spec, RngStream& rng);

/// Normalized log density of the half-distribution at x > 0.
double log_density(const HyperpriorSpec& spec, double x);

struct LogDensityDerivative {
  double value;
  double d_dx;
};

/// Log density together with its derivative in x.
LogDensityDerivative log_density_with_derivative(const HyperpriorSpec& spec, double x);

/// Log of the improper reference prior p(sigma^2) ∝ 1/sigma^2, constant fixed at 0.
double log_density_sigma2_reference(double sigma2);

double cdf(const HyperpriorSpec& spec, double x);
double quantile(const HyperpriorSpec& spec, double p);
inline double median(const HyperpriorSpec& spec) { return quantile(spec, 0.5); }

}  // namespace hsprior
