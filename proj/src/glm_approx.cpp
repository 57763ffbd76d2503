#include "hsprior/glm_approx.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hsprior/error.hpp"

namespace hsprior {

std::string_view to_string(LikelihoodKind kind) {
  return kind == LikelihoodKind::gaussian ? "gaussian" : "bernoulli-logit";
}

LikelihoodKind parse_likelihood(std::string_view name) {
  if (name == "gaussian" || name == "regression") return LikelihoodKind::gaussian;
  if (name == "bernoulli-logit" || name == "logistic" || name == "classification")
    return LikelihoodKind::bernoulli_logit;
  throw std::invalid_argument("unknown likelihood '" + std::string(name) + "'");
}

double logistic(double f) {
  if (f >= 0.0) return 1.0 / (1.0 + std::exp(-f));
  const double e = std::exp(f);
  return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

LogLikDerivatives logistic_loglik_derivs(double f, int y) {
  detail::require(y == 0 || y == 1, "logistic_loglik_derivs: y must be 0 or 1");
  detail::require(std::isfinite(f), "logistic_loglik_derivs: f must be finite");
  const double s = logistic(f);
  const double sc = logistic(std::clamp(f, -kLogitCurvatureClamp, kLogitCurvatureClamp));
  return {y * f - softplus(f), y - s, sc * (sc - 1.0)};
}

PseudoObservation pseudo_observation(double f, int y, LikelihoodKind kind) {
  if (kind != LikelihoodKind::bernoulli_logit)
    throw std::invalid_argument("pseudo_observation: Gaussian terms need no approximation");
  const auto d = logistic_loglik_derivs(f, y);
  return {f - d.first / d.second, -1.0 / d.second};
}

Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& rhs) {
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);
  const double jitter = 1e-10 * std::max(A.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  Eigen::MatrixXd regularized = A;
  regularized.diagonal().array() += jitter;
  llt.compute(regularized);
  if (llt.info() != Eigen::Success)
    throw NumericalError("spd_solve: matrix is not positive definite even after jitter");
  return llt.solve(rhs);
}

GaussianApprox approx_conditional_posterior(const Eigen::MatrixXd& X,
                                            std::span<const PseudoObservation> pseudo,
                                            const Eigen::VectorXd& lambda, double tau) {
  const Eigen::Index n = X.rows(), D = X.cols();
  detail::require(n >= 1, "approx_conditional_posterior: need at least one observation");
  detail::require(static_cast<Eigen::Index>(pseudo.size()) == n,
                  "approx_conditional_posterior: pseudo-data length must equal rows of X");
  detail::require(lambda.size() == D, "approx_conditional_posterior: lambda length must equal D");
  if (!X.allFinite() || !lambda.allFinite() || !std::isfinite(tau))
    throw std::invalid_argument("approx_conditional_posterior: non-finite input");
  detail::require(tau > 0.0 && (lambda.array() > 0.0).all(),
                  "approx_conditional_posterior: tau and lambda must be positive");

  Eigen::VectorXd w(n), z(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = pseudo[static_cast<std::size_t>(i)];
    if (!std::isfinite(p.z) || !(p.var > 0.0) || !std::isfinite(p.var))
      throw std::invalid_argument("approx_conditional_posterior: invalid pseudo-observation");
    w(i) = 1.0 / p.var;
    z(i) = p.z;
  }

  Eigen::MatrixXd precision = X.transpose() * w.asDiagonal() * X;
  precision.diagonal().array() += (tau * tau * lambda.array().square()).inverse();
  GaussianApprox out;
  out.cov = spd_solve(precision, Eigen::MatrixXd::Identity(D, D));
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  out.mean = out.cov * (X.transpose() * (w.asDiagonal() * z));
  return out;
}

}  // namespace hsprior
