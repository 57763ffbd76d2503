#pragma once

#include <span>
#include <vector>

namespace hsprior {

/// Problem dimensions entering the horseshoe shrinkage formulas.
///
/// The closed forms assume uncorrelated, standardized predictors so that
/// X'X ≈ n I. For an identity design (normal-means model, X'X = I) use n = 1.
/// For logistic models `sigma` is the plug-in value (see logistic_sigma_plugin).
struct DesignScale {
  long n = 1;
  long D = 1;
  double sigma = 1.0;

  void validate() const;
  /// u = tau * sqrt(n) / sigma, the only combination the moment formulas depend on.
  double u(double tau) const;
};

struct ShrinkageProfile {
  std::vector<double> kappa;
  double m_eff = 0.0;
};

struct Moments {
  double mean;
  double variance;
};

double shrinkage_factor(double lambda, double tau, const DesignScale& scale);

/// Prior density of the shrinkage factor kappa in (0, 1) under lambda ~ C+(0, 1).
double kappa_prior_density(double kappa, double tau, const DesignScale& scale);

/// Prior probability that kappa lies in [a, b], by adaptive Gauss-Kronrod
/// quadrature after the substitution kappa = sin^2(theta).
double kappa_prior_mass(double a, double b, double tau, const DesignScale& scale);

Moments kappa_moments(double tau, const DesignScale& scale);
Moments meff_moments(double tau, const DesignScale& scale);

/// tau0 such that E[m_eff | tau0, sigma] = p0.
double tau_reference(double p0, const DesignScale& scale);

/// tau0 for the identity design (X = I, n = D).
double tau_reference_identity(double p0, long D, double sigma);

/// Minimax-optimal tau (up to a log factor) for the normal-means model.
double tau_oracle_vanderpas(long p_star, long n);

ShrinkageProfile shrinkage_profile(std::span<const double> lambda, double tau,
                                   const DesignScale& scale);

}  // namespace hsprior
