#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hsprior/dataset.hpp"
#include "hsprior/diagnostics.hpp"
#include "hsprior/error.hpp"
#include "hsprior/hmc.hpp"
#include "hsprior/inference.hpp"
#include "hsprior/prior_design.hpp"
#include "hsprior/shrinkage_math.hpp"
#include "hsprior/stats.hpp"

using namespace hsprior;

TEST_CASE("HMC recovers a correlated Gaussian") {
  Eigen::Matrix2d cov;
  cov << 4.0, 1.2, 1.2, 1.0;
  const Eigen::Matrix2d prec = cov.inverse();
  const Eigen::Vector2d mu(1.0, -2.0);
  const LogDensityFn target = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const Eigen::Vector2d d = x - mu;
    g = -prec * d;
    return -0.5 * d.dot(prec * d);
  };
  RngStream rng(1, 0);
  HmcConfig cfg;
  cfg.warmup = 500;
  cfg.draws = 4000;
  cfg.target_accept = 0.8;
  const auto out = run_hmc_chain(target, Eigen::VectorXd::Zero(2), cfg, rng);
  const Eigen::MatrixXd& s = out.samples;
  for (int j = 0; j < 2; ++j) {
    const Eigen::VectorXd col = s.col(j);
    const double ess = ess_basic(Eigen::MatrixXd(col));
    const double mean = col.mean();
    CHECK(std::abs(mean - mu(j)) < 4.0 * std::sqrt(cov(j, j) / ess));
    const double var = (col.array() - mean).square().mean();
    CHECK(var == doctest::Approx(cov(j, j)).epsilon(0.15));
  }
  CHECK(std::count(out.divergent.begin(), out.divergent.end(), 1) == 0);
  CHECK(out.inverse_metric(0) > out.inverse_metric(1));
}

TEST_CASE("dual averaging drives the step size toward the target acceptance") {
  DualAveraging da(1.0, 0.8);
  double eps = 1.0;
  for (int i = 0; i < 200; ++i) eps = da.update(0.3);
  CHECK(eps < 1.0);
  DualAveraging up(1.0, 0.8);
  for (int i = 0; i < 200; ++i) eps = up.update(1.0);
  CHECK(eps > 1.0);
}

TEST_CASE("conjugate one-coefficient model matches the analytic posterior") {
  const auto p = generate_linear(30, 1, 1, 0.7, 1.0, 12);
  const Dataset data = standardize(p.data);
  ModelSpec spec;
  spec.include_intercept = false;
  spec.fixed_sigma = 1.0;
  spec.prior.tau_prior = HyperpriorSpec::fixed(0.5);
  spec.prior.lambda_prior = HyperpriorSpec::fixed(1.0);
  SamplerSettings settings;
  settings.chains = 2;
  settings.iterations = 2000;
  settings.target_accept = 0.9;
  settings.seed = 4;
  const FitResult r = fit(spec, data, settings);
  const double xx = data.X.col(0).squaredNorm(), xy = data.X.col(0).dot(data.y);
  const double post_var = 1.0 / (xx + 1.0 / 0.25);
  const double post_mean = post_var * xy;
  const auto& s = r.parameters.front();
  REQUIRE(s.name == "beta[1]");
  CHECK(std::abs(s.mean - post_mean) < 4.0 * std::sqrt(post_var / s.ess_bulk));
  CHECK(s.sd == doctest::Approx(std::sqrt(post_var)).epsilon(0.1));
  CHECK(r.max_rhat < 1.05);
}

TEST_CASE("fits are reproducible and independent of the execution mode") {
  const auto p = generate_linear(25, 4, 2, 2.0, 1.0, 2);
  const Dataset data = standardize(p.data);
  ModelSpec spec;
  spec.prior = make_prior_config(2.0, DesignScale{25, 4, 1.0}, HyperpriorFamily::half_cauchy, std::nullopt, true);
  SamplerSettings settings;
  settings.chains = 2;
  settings.iterations = 200;
  settings.seed = 77;
  const FitResult a = fit(spec, data, settings, Execution::serial);
  const FitResult b = fit(spec, data, settings, Execution::parallel);
  const FitResult c = fit(spec, data, settings, Execution::parallel);
  CHECK(a.draws.beta == b.draws.beta);
  CHECK(b.draws.sigma == c.draws.sigma);
  CHECK(a.draws.tau == c.draws.tau);
  settings.seed = 78;
  const FitResult d = fit(spec, data, settings);
  CHECK(a.draws.beta != d.draws.beta);
  CHECK(a.draws.size() == 200);
  CHECK((a.draws.lambda.array() > 0.0).all());
  CHECK((a.draws.sigma.array() > 0.0).all());
}

TEST_CASE("predictive density averages over draws before the log") {
  PosteriorDraws g;
  g.likelihood = LikelihoodKind::gaussian;
  g.beta = Eigen::MatrixXd::Zero(1, 1);
  g.lambda = Eigen::MatrixXd::Ones(1, 1);
  g.intercept = Eigen::VectorXd::Zero(1);
  g.tau = Eigen::VectorXd::Ones(1);
  g.sigma = Eigen::VectorXd::Ones(1);
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(1, 1);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(1);
  CHECK(predict(g, X, &y).mlpd == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)));

  PosteriorDraws l;
  l.likelihood = LikelihoodKind::bernoulli_logit;
  l.beta = Eigen::MatrixXd::Zero(2, 1);
  l.lambda = Eigen::MatrixXd::Ones(2, 1);
  l.intercept = Eigen::VectorXd::Zero(2);
  l.tau = Eigen::VectorXd::Ones(2);
  Eigen::VectorXd yl(3);
  yl << 1, 0, 1;
  CHECK(predict(l, Eigen::MatrixXd::Ones(3, 1), &yl).mlpd == doctest::Approx(-std::log(2.0)));

  l.intercept << std::log(0.2 / 0.8), std::log(0.4 / 0.6);
  Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  const auto pr = predict(l, Eigen::MatrixXd::Ones(1, 1), &one);
  CHECK(pr.mlpd == doctest::Approx(std::log(0.3)));
  CHECK(pr.mean_prediction(0) == doctest::Approx(0.3));
  CHECK_THROWS_AS(predict(l, Eigen::MatrixXd::Ones(1, 2)), std::invalid_argument);
}

TEST_CASE("posterior shrinkage profile uses the same formula as the analytic code") {
  PosteriorDraws d;
  d.likelihood = LikelihoodKind::gaussian;
  d.beta = Eigen::MatrixXd::Zero(2, 3);
  d.lambda.resize(2, 3);
  d.lambda << 0.5, 1.0, 2.0, 3.0, 0.1, 1.0;
  d.intercept = Eigen::VectorXd::Zero(2);
  d.tau = Eigen::Vector2d(0.2, 0.05);
  d.sigma = Eigen::Vector2d(1.5, 0.7);
  const auto prof = posterior_shrinkage_profile(d, DesignScale{40, 3, 1.0});
  for (int s = 0; s < 2; ++s) {
    const std::vector<double> lam{d.lambda(s, 0), d.lambda(s, 1), d.lambda(s, 2)};
    const auto expected = shrinkage_profile(lam, d.tau(s), DesignScale{40, 3, d.sigma(s)});
    CHECK(prof.m_eff(s) == doctest::Approx(expected.m_eff).epsilon(1e-14));
  }
  d.tau.setConstant(1e-12);
  CHECK(posterior_shrinkage_profile(d, DesignScale{40, 3, 1.0}).mean < 1e-15);
}

TEST_CASE("sampler settings are validated") {
  SamplerSettings s;
  s.iterations = 1;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = SamplerSettings{};
  s.warmup_fraction = 1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = SamplerSettings{};
  CHECK(s.draws_per_chain() == 500);
  ModelSpec spec;
  Dataset empty;
  empty.X.resize(0, 3);
  empty.y.resize(0);
  CHECK_THROWS_AS(LogPosterior(spec, empty), std::invalid_argument);
}

namespace {

// Keeps every k-th draw of each chain so that the count stays near the ESS.
std::vector<double> thin_to_ess(const Eigen::VectorXd& x, int chains, int per_chain) {
  Eigen::MatrixXd m(per_chain, chains);
  for (int c = 0; c < chains; ++c) m.col(c) = x.segment(c * per_chain, per_chain);
  const double ess = convergence(m).ess_bulk;
  const int step = std::max(1, static_cast<int>(std::ceil(chains * per_chain / ess)));
  std::vector<double> out;
  for (int c = 0; c < chains; ++c)
    for (int i = 0; i < per_chain; i += step) out.push_back(x(c * per_chain + i));
  return out;
}

}  // namespace

TEST_CASE("prior-only sampling recovers heavy-tailed hyperpriors") {
  // regression guard: a non-reversible warmup move once let log lambda drift
  Dataset empty;
  empty.X.resize(0, 2);
  empty.y.resize(0);
  ModelSpec spec;
  spec.include_intercept = false;
  spec.fixed_sigma = 1.0;
  spec.prior.tau_prior = HyperpriorSpec::half_cauchy(0.2);
  SamplerSettings settings;
  settings.iterations = 4000;
  settings.seed = 31;
  const FitResult r = fit(spec, empty, settings);
  const auto& d = r.draws;
  const auto tau = thin_to_ess(d.tau, d.num_chains, d.draws_per_chain);
  CHECK(stats::ks_statistic(tau, [&](double x) { return cdf(spec.prior.tau_prior, x); }) <
        stats::ks_critical(0.001, static_cast<double>(tau.size())));
  const Eigen::VectorXd lam = d.lambda.col(1);
  const auto l = thin_to_ess(lam, d.num_chains, d.draws_per_chain);
  CHECK(stats::ks_statistic(l, [&](double x) { return cdf(spec.prior.lambda_prior, x); }) <
        stats::ks_critical(0.001, static_cast<double>(l.size())));
  CHECK(r.max_rhat < 1.01);
}

TEST_CASE("coupled tau makes the m_eff posterior invariant to the scale of y") {
  const auto p = generate_linear(40, 6, 2, 1.5, 1.0, 21);
  const Dataset data = standardize(p.data);
  Dataset doubled = data;
  doubled.y *= 2.0;
  ModelSpec spec;
  spec.prior = make_prior_config(2.0, DesignScale{40, 6, 1.0}, HyperpriorFamily::half_cauchy,
                                 std::nullopt, true);
  SamplerSettings settings;
  settings.iterations = 3000;
  settings.seed = 22;
  const FitResult a = fit(spec, data, settings);
  settings.seed = 23;
  const FitResult b = fit(spec, doubled, settings);
  const DesignScale scale{40, 6, 1.0};
  const auto ma = posterior_shrinkage_profile(a.draws, scale).m_eff;
  const auto mb = posterior_shrinkage_profile(b.draws, scale).m_eff;
  const auto ta = thin_to_ess(ma, a.draws.num_chains, a.draws.draws_per_chain);
  const auto tb = thin_to_ess(mb, b.draws.num_chains, b.draws.draws_per_chain);
  CHECK(stats::ks_statistic(ta, tb) <
        stats::ks_critical(0.001, static_cast<double>(ta.size()), static_cast<double>(tb.size())));
  CHECK(b.draws.sigma.mean() == doctest::Approx(2.0 * a.draws.sigma.mean()).epsilon(0.05));
}
