#include "hsprior/shrinkage_math.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hsprior/error.hpp"

namespace hsprior {
namespace {

void require_finite_nonneg(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0)
    throw std::invalid_argument(std::string(what) + " must be finite and nonnegative");
}

}  // namespace

void DesignScale::validate() const {
  detail::require(n >= 1, "DesignScale: n must be >= 1");
  detail::require(D >= 1, "DesignScale: D must be >= 1");
  detail::require(std::isfinite(sigma) && sigma > 0.0, "DesignScale: sigma must be positive");
}

double DesignScale::u(double tau) const {
  return tau * std::sqrt(static_cast<double>(n)) / sigma;
}

double shrinkage_factor(double lambda, double tau, const DesignScale& scale) {
  require_finite_nonneg(lambda, "lambda");
  require_finite_nonneg(tau, "tau");
  scale.validate();
  const double ul = scale.u(tau) * lambda;
  return 1.0 / (1.0 + ul * ul);
}

double kappa_prior_density(double kappa, double tau, const DesignScale& scale) {
  if (!(kappa > 0.0 && kappa < 1.0))
    throw std::invalid_argument("kappa_prior_density: kappa must lie strictly inside (0, 1)");
  require_finite_nonneg(tau, "tau");
  detail::require(tau > 0.0, "kappa_prior_density: tau must be positive");
  scale.validate();
  const double u = scale.u(tau);
  return u / ((u * u - 1.0) * kappa + 1.0) / (std::numbers::pi * std::sqrt(kappa * (1.0 - kappa)));
}

double kappa_prior_mass(double a, double b, double tau, const DesignScale& scale) {
  detail::require(0.0 <= a && a <= b && b <= 1.0, "kappa_prior_mass: need 0 <= a <= b <= 1");
  detail::require(tau > 0.0 && std::isfinite(tau), "kappa_prior_mass: tau must be positive");
  scale.validate();
  const double u = scale.u(tau);
  // kappa = sin^2(t): dkappa / sqrt(kappa (1 - kappa)) = 2 dt, so the integrand is smooth.
  auto integrand = [u](double t) {
    const double s = std::sin(t);
    return 2.0 * u / (std::numbers::pi * ((u * u - 1.0) * s * s + 1.0));
  };
  const double lo = std::asin(std::sqrt(a));
  const double hi = std::asin(std::sqrt(b));
  if (hi <= lo) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo, hi, 15,
                                                                        1e-13);
}

Moments kappa_moments(double tau, const DesignScale& scale) {
  require_finite_nonneg(tau, "tau");
  scale.validate();
  const double u = scale.u(tau);
  if (u == 0.0) return {1.0, 0.0};
  const double one_u = 1.0 + u;
  return {1.0 / one_u, u / (2.0 * one_u * one_u)};
}

Moments meff_moments(double tau, const DesignScale& scale) {
  const Moments k = kappa_moments(tau, scale);
  const double D = static_cast<double>(scale.D);
  const double u = scale.u(tau);
  // u/(1+u) written directly avoids cancellation in 1 - 1/(1+u) for small u.
  return {u / (1.0 + u) * D, k.variance * D};
}

double tau_reference(double p0, const DesignScale& scale) {
  scale.validate();
  const double D = static_cast<double>(scale.D);
  if (!(p0 > 0.0) || !(p0 < D))
    throw std::invalid_argument("tau_reference: p0 must satisfy 0 < p0 < D");
  return p0 / (D - p0) * scale.sigma / std::sqrt(static_cast<double>(scale.n));
}

double tau_reference_identity(double p0, long D, double sigma) {
  return tau_reference(p0, DesignScale{1, D, sigma});
}

double tau_oracle_vanderpas(long p_star, long n) {
  if (!(p_star > 0 && p_star <= n))
    throw std::invalid_argument("tau_oracle_vanderpas: need 0 < p_star <= n");
  return static_cast<double>(p_star) / static_cast<double>(n);
}

ShrinkageProfile shrinkage_profile(std::span<const double> lambda, double tau,
                                   const DesignScale& scale) {
  ShrinkageProfile profile;
  profile.kappa.reserve(lambda.size());
  for (double l : lambda) {
    const double k = shrinkage_factor(l, tau, scale);
    profile.kappa.push_back(k);
    profile.m_eff += 1.0 - k;
  }
  return profile;
}

}  // namespace hsprior
