#include "hsprior/distributions.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "hsprior/error.hpp"

namespace hsprior {
namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void require_positive_x(double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::invalid_argument("log_density: x must be positive and finite");
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix64(sm);
  for (std::uint64_t k = 0; k < stream; ++k) jump();
}

RngStream::result_type RngStream::operator()() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

void RngStream::jump() {
  static constexpr std::uint64_t kJump[] = {0x180ec6d33cfd0aba, 0xd5a61266f0c9392c,
                                            0xa9582618e03fc9aa, 0x39abdc4529b1661c};
  std::array<std::uint64_t, 4> acc{};
  for (std::uint64_t word : kJump) {
    for (int b = 0; b < 64; ++b) {
      if (word & (std::uint64_t{1} << b)) {
        for (int i = 0; i < 4; ++i) acc[i] ^= s_[i];
      }
      (*this)();
    }
  }
  s_ = acc;
}

double RngStream::uniform_open() {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::standard_normal() { return normal_(*this); }

std::string_view to_string(HyperpriorFamily family) {
  switch (family) {
    case HyperpriorFamily::fixed: return "fixed";
    case HyperpriorFamily::half_normal: return "half-normal";
    case HyperpriorFamily::half_cauchy: return "half-cauchy";
    case HyperpriorFamily::half_t: return "half-t";
  }
  return "unknown";
}

HyperpriorFamily parse_family(std::string_view name) {
  if (name == "fixed") return HyperpriorFamily::fixed;
  if (name == "half-normal" || name == "half_normal") return HyperpriorFamily::half_normal;
  if (name == "half-cauchy" || name == "half_cauchy") return HyperpriorFamily::half_cauchy;
  if (name == "half-t" || name == "half_t") return HyperpriorFamily::half_t;
  throw std::invalid_argument("unknown hyperprior family '" + std::string(name) + "'");
}

void HyperpriorSpec::validate() const {
  detail::require(std::isfinite(scale) && scale > 0.0, "hyperprior scale must be positive");
  if (family == HyperpriorFamily::half_t)
    detail::require(std::isfinite(df) && df > 0.0, "half-t degrees of freedom must be positive");
}

std::string HyperpriorSpec::label() const {
  std::ostringstream os;
  os.precision(6);
  os << to_string(family) << "(" << scale;
  if (family == HyperpriorFamily::half_t) os << ", df=" << df;
  os << ")";
  return os.str();
}

double sample(const HyperpriorSpec& spec, RngStream& rng) {
  switch (spec.family) {
    case HyperpriorFamily::fixed:
      return spec.scale;
    case HyperpriorFamily::half_normal:
      return spec.scale * std::abs(rng.standard_normal());
    case HyperpriorFamily::half_cauchy:
      return spec.scale * std::abs(std::tan(std::numbers::pi * (rng.uniform_open() - 0.5)));
    case HyperpriorFamily::half_t: {
      std::chi_squared_distribution<double> chi2(spec.df);
      const double g = chi2(rng);
      return spec.scale * std::abs(rng.standard_normal()) / std::sqrt(g / spec.df);
    }
  }
  throw std::logic_error("unreachable hyperprior family");
}

LogDensityDerivative log_density_with_derivative(const HyperpriorSpec& spec, double x) {
  require_positive_x(x);
  const double s = spec.scale;
  const double r = x / s;
  switch (spec.family) {
    case HyperpriorFamily::fixed:
      throw std::invalid_argument("log_density: a fixed hyperprior has no density");
    case HyperpriorFamily::half_normal:
      return {0.5 * std::log(2.0 / std::numbers::pi) - std::log(s) - 0.5 * r * r, -r / s};
    case HyperpriorFamily::half_cauchy:
      return {std::log(2.0 / std::numbers::pi) - std::log(s) - std::log1p(r * r),
              -2.0 * x / (s * s + x * x)};
    case HyperpriorFamily::half_t: {
      const double nu = spec.df;
      const double norm = std::log(2.0) + std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                          0.5 * std::log(nu * std::numbers::pi);
      return {norm - std::log(s) - 0.5 * (nu + 1.0) * std::log1p(r * r / nu),
              -(nu + 1.0) * x / (nu * s * s + x * x)};
    }
  }
  throw std::logic_error("unreachable hyperprior family");
}

double log_density(const HyperpriorSpec& spec, double x) {
  return log_density_with_derivative(spec, x).value;
}

double log_density_sigma2_reference(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw std::invalid_argument("log_density_sigma2_reference: sigma2 must be positive");
  return -std::log(sigma2);
}

double cdf(const HyperpriorSpec& spec, double x) {
  if (x <= 0.0) return 0.0;
  const double r = x / spec.scale;
  switch (spec.family) {
    case HyperpriorFamily::fixed: return x >= spec.scale ? 1.0 : 0.0;
    case HyperpriorFamily::half_normal: return std::erf(r / std::numbers::sqrt2);
    case HyperpriorFamily::half_cauchy: return 2.0 / std::numbers::pi * std::atan(r);
    case HyperpriorFamily::half_t: {
      const boost::math::students_t t(spec.df);
      return 2.0 * boost::math::cdf(t, r) - 1.0;
    }
  }
  throw std::logic_error("unreachable hyperprior family");
}

double quantile(const HyperpriorSpec& spec, double p) {
  detail::require(p > 0.0 && p < 1.0, "quantile: p must lie in (0, 1)");
  switch (spec.family) {
    case HyperpriorFamily::fixed: return spec.scale;
    case HyperpriorFamily::half_normal:
      return spec.scale * std::numbers::sqrt2 * boost::math::erf_inv(p);
    case HyperpriorFamily::half_cauchy: return spec.scale * std::tan(0.5 * std::numbers::pi * p);
    case HyperpriorFamily::half_t: {
      const boost::math::students_t t(spec.df);
      return spec.scale * boost::math::quantile(t, 0.5 * (1.0 + p));
    }
  }
  throw std::logic_error("unreachable hyperprior family");
}

}  // namespace hsprior
