#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hsprior/error.hpp"
#include "hsprior/inference.hpp"

namespace hsprior {
namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

void ModelSpec::validate() const {
  prior.tau_prior.validate();
  prior.lambda_prior.validate();
  detail::require(intercept_prior_sd > 0.0 && std::isfinite(intercept_prior_sd),
                  "intercept_prior_sd must be positive");
  if (fixed_sigma)
    detail::require(*fixed_sigma > 0.0 && std::isfinite(*fixed_sigma),
                    "fixed_sigma must be positive");
  if (likelihood == LikelihoodKind::bernoulli_logit)
    detail::require(!prior.couple_tau_to_sigma,
                    "logistic models have no sigma to couple tau to; fold the plug-in sigma into "
                    "the tau scale instead");
}

int SamplerSettings::warmup() const {
  return static_cast<int>(std::lround(warmup_fraction * iterations));
}

void SamplerSettings::validate() const {
  detail::require(chains >= 1, "chains must be >= 1");
  detail::require(iterations >= 2, "iterations must be >= 2");
  detail::require(warmup_fraction > 0.0 && warmup_fraction < 1.0,
                  "warmup_fraction must lie in (0, 1)");
  detail::require(draws_per_chain() >= 1, "no post-warmup draws left");
  detail::require(target_accept > 0.0 && target_accept < 1.0, "target_accept must lie in (0, 1)");
  detail::require(max_leapfrog >= 1, "max_leapfrog must be >= 1");
}

LogPosterior::LogPosterior(const ModelSpec& spec, const Dataset& data) : spec_(spec), data_(data) {
  spec_.validate();
  const bool gaussian = spec.likelihood == LikelihoodKind::gaussian;
  layout_.D = data.D();
  layout_.sample_lambda = spec.prior.lambda_prior.family != HyperpriorFamily::fixed;
  layout_.sample_tau = spec.prior.tau_prior.family != HyperpriorFamily::fixed;
  layout_.sample_sigma = gaussian && !spec.fixed_sigma;
  layout_.intercept = spec.include_intercept;
  detail::require(data.D() >= 1, "model needs at least one predictor");
  detail::require(data.y.size() == data.n(), "targets and predictors differ in length");
  if (data.identity_design)
    detail::require(data.n() == data.D(), "identity design requires n == D");
  if (layout_.sample_sigma && data.n() == 0)
    throw std::invalid_argument(
        "a Gaussian model without data has an improper posterior for sigma; fix sigma");
  if (!gaussian)
    for (Eigen::Index i = 0; i < data.n(); ++i)
      detail::require(data.y(i) == 0.0 || data.y(i) == 1.0, "logistic targets must be 0 or 1");

  if (data.n() >= 2) {
    const double m = data.y.mean();
    const double sd = std::sqrt((data.y.array() - m).square().sum() / (data.n() - 1.0));
    if (sd > 0.0 && std::isfinite(sd)) sigma_init_ = sd;
  }
}

ModelParameters LogPosterior::unpack(const Eigen::VectorXd& theta) const {
  const auto& L = layout_;
  ModelParameters p;
  if (L.sample_lambda)
    p.lambda = theta.segment(L.log_lambda(), L.D).array().exp().matrix();
  else
    p.lambda = Eigen::VectorXd::Constant(L.D, spec_.prior.lambda_prior.scale);
  if (spec_.likelihood == LikelihoodKind::gaussian)
    p.sigma = L.sample_sigma ? std::exp(theta(L.log_sigma())) : *spec_.fixed_sigma;
  const HyperpriorSpec tau_spec = spec_.likelihood == LikelihoodKind::gaussian
                                      ? spec_.prior.tau_prior_given_sigma(p.sigma)
                                      : spec_.prior.tau_prior;
  p.tau = L.sample_tau ? std::exp(theta(L.log_tau())) : tau_spec.scale;
  p.beta = theta.segment(L.z(), L.D).cwiseProduct(p.lambda) * p.tau;
  p.intercept = L.intercept ? theta(L.intercept_index()) : 0.0;
  return p;
}

double LogPosterior::evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
  const auto& L = layout_;
  const bool gaussian = spec_.likelihood == LikelihoodKind::gaussian;
  const ModelParameters p = unpack(theta);
  const auto z = theta.segment(L.z(), L.D);
  const auto n = data_.n();

  Eigen::VectorXd f = data_.identity_design ? p.beta : Eigen::VectorXd(data_.X * p.beta);
  f.array() += p.intercept;

  double lp = 0.0;
  Eigen::VectorXd dldf(n);
  double sum_sq_resid = 0.0;
  if (gaussian) {
    const Eigen::VectorXd r = data_.y - f;
    sum_sq_resid = r.squaredNorm();
    const double s2 = p.sigma * p.sigma;
    lp += -static_cast<double>(n) * (std::log(p.sigma) + kHalfLog2Pi) - 0.5 * sum_sq_resid / s2;
    dldf = r / s2;
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      lp += data_.y(i) * f(i) - softplus(f(i));
      dldf(i) = data_.y(i) - logistic(f(i));
    }
  }
  const Eigen::VectorXd g_beta =
      data_.identity_design ? dldf : Eigen::VectorXd(data_.X.transpose() * dldf);

  grad.resize(L.size());
  // z_j ~ N(0, 1)
  lp += -0.5 * z.squaredNorm() - static_cast<double>(L.D) * kHalfLog2Pi;
  grad.segment(L.z(), L.D) = -z + g_beta.cwiseProduct(p.lambda) * p.tau;

  const Eigen::VectorXd g_beta_beta = g_beta.cwiseProduct(p.beta);
  const double sum_g_beta_beta = g_beta_beta.sum();

  if (L.sample_lambda) {
    for (Eigen::Index j = 0; j < L.D; ++j) {
      const double lam = p.lambda(j);
      if (!(lam > 0.0) || !std::isfinite(lam)) return std::numeric_limits<double>::quiet_NaN();
      const auto d = log_density_with_derivative(spec_.prior.lambda_prior, lam);
      lp += d.value + std::log(lam);
      grad(L.log_lambda() + j) = g_beta_beta(j) + lam * d.d_dx + 1.0;
    }
  }

  const HyperpriorSpec tau_spec =
      gaussian ? spec_.prior.tau_prior_given_sigma(p.sigma) : spec_.prior.tau_prior;
  double tau_dx = 0.0;
  if (L.sample_tau) {
    if (!(p.tau > 0.0) || !std::isfinite(p.tau)) return std::numeric_limits<double>::quiet_NaN();
    const auto d = log_density_with_derivative(tau_spec, p.tau);
    tau_dx = d.d_dx;
    lp += d.value + std::log(p.tau);
    grad(L.log_tau()) = sum_g_beta_beta + p.tau * d.d_dx + 1.0;
  }

  if (L.sample_sigma) {
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) return std::numeric_limits<double>::quiet_NaN();
    const double s2 = p.sigma * p.sigma;
    // p(sigma^2) ∝ 1/sigma^2 plus the Jacobian of sigma^2 = exp(2 log sigma).
    lp += log_density_sigma2_reference(s2) + std::log(2.0 * s2);
    double g = -static_cast<double>(n) + sum_sq_resid / s2;
    if (spec_.prior.couple_tau_to_sigma) {
      if (L.sample_tau)
        g += -1.0 - p.tau * tau_dx;  // d/dlog(scale) of the scale-family density of tau
      else
        g += sum_g_beta_beta;  // tau = c * sigma moves every beta
    }
    grad(L.log_sigma()) = g;
  }

  if (L.intercept) {
    const double sd = spec_.intercept_prior_sd;
    lp += -0.5 * (p.intercept / sd) * (p.intercept / sd) - std::log(sd) - kHalfLog2Pi;
    grad(L.intercept_index()) = dldf.sum() - p.intercept / (sd * sd);
  }
  return lp;
}

Eigen::VectorXd LogPosterior::initial_point(RngStream& rng) const {
  const auto& L = layout_;
  Eigen::VectorXd theta(L.size());
  for (Eigen::Index j = 0; j < L.D; ++j) theta(L.z() + j) = 0.1 * rng.standard_normal();
  if (L.sample_lambda)
    theta.segment(L.log_lambda(), L.D).setConstant(std::log(median(spec_.prior.lambda_prior)));
  const double sigma = L.sample_sigma ? sigma_init_ : spec_.fixed_sigma.value_or(1.0);
  if (L.sample_tau) {
    const HyperpriorSpec tau_spec = spec_.likelihood == LikelihoodKind::gaussian
                                        ? spec_.prior.tau_prior_given_sigma(sigma)
                                        : spec_.prior.tau_prior;
    theta(L.log_tau()) = std::log(median(tau_spec));
  }
  if (L.sample_sigma) theta(L.log_sigma()) = std::log(sigma_init_);
  if (L.intercept) theta(L.intercept_index()) = 0.1 * rng.standard_normal();
  return theta;
}

LogPosteriorValue log_posterior_and_gradient(const ModelSpec& spec, const Dataset& data,
                                             const Eigen::VectorXd& theta) {
  const LogPosterior target(spec, data);
  const auto& L = target.layout();
  detail::require(theta.size() == L.size(), "log_posterior_and_gradient: wrong parameter length");
  LogPosteriorValue out{0.0, Eigen::VectorXd()};
  out.value = target.evaluate(theta, out.gradient);

  auto block_name = [&](Eigen::Index k) -> std::string {
    std::ostringstream os;
    if (k < L.D) {
      os << "z[" << k + 1 << "]";
    } else if (L.sample_lambda && k < L.log_lambda() + L.D) {
      os << "log_lambda[" << k - L.log_lambda() + 1 << "]";
    } else if (L.sample_tau && k == L.log_tau()) {
      os << "log_tau";
    } else if (L.sample_sigma && k == L.log_sigma()) {
      os << "log_sigma";
    } else {
      os << "intercept";
    }
    return os.str();
  };

  if (!std::isfinite(out.value)) {
    for (Eigen::Index k = 0; k < theta.size(); ++k)
      if (!std::isfinite(theta(k)))
        throw NumericalError("non-finite log posterior: parameter " + block_name(k) +
                             " is not finite");
    throw NumericalError("non-finite log posterior value");
  }
  for (Eigen::Index k = 0; k < out.gradient.size(); ++k)
    if (!std::isfinite(out.gradient(k)))
      throw NumericalError("non-finite gradient component " + block_name(k));
  return out;
}

}  // namespace hsprior
