#pragma once

#include <span>
#include <string_view>

#include <Eigen/Dense>

namespace hsprior {

enum class LikelihoodKind { gaussian, bernoulli_logit };

std::string_view to_string(LikelihoodKind kind);
LikelihoodKind parse_likelihood(std::string_view name);

/// Gaussian surrogate (z, var) for one non-Gaussian likelihood term.
struct PseudoObservation {
  double z;
  double var;
};

struct LogLikDerivatives {
  double value;   // L(f)
  double first;   // L'(f)
  double second;  // L''(f)
};

/// |f| beyond this is clamped before evaluating L'' so that s(1-s) stays representable.
inline constexpr double kLogitCurvatureClamp = 35.0;

double logistic(double f);
/// log(1 + exp(x)) without overflow.
double softplus(double x);

/// Bernoulli-logit log likelihood of y in {0, 1} at linear predictor f and its
/// first two derivatives in f.
LogLikDerivatives logistic_loglik_derivs(double f, int y);

/// Second-order Taylor pseudo-observation of the Bernoulli-logit term at f.
PseudoObservation pseudo_observation(double f, int y,
                                     LikelihoodKind kind = LikelihoodKind::bernoulli_logit);

/// Noise deviation to plug into the Gaussian shrinkage formulas for logistic
/// regression: the pseudo-variance on the decision boundary is 4. Since every
/// other point has a larger pseudo-variance, using 2 overestimates E[m_eff].
constexpr double logistic_sigma_plugin() { return 2.0; }

struct GaussianApprox {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Conditional posterior of beta given local scales (lambda_j, not squared)
/// and tau under Gaussian pseudo-data: cov = (tau^-2 Lambda^-1 + X' S^-1 X)^-1,
/// mean = cov X' S^-1 z. Works for D > n.
GaussianApprox approx_conditional_posterior(const Eigen::MatrixXd& X,
                                            std::span<const PseudoObservation> pseudo,
                                            const Eigen::VectorXd& lambda, double tau);

/// Cholesky solve of a symmetric positive-definite system; on failure retries
/// once with a relative diagonal jitter of 1e-10 and throws NumericalError if
/// that also fails. Returns the inverse when `rhs` is the identity.
Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& rhs);

}  // namespace hsprior
