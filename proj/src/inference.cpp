#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "hsprior/diagnostics.hpp"
#include "hsprior/error.hpp"
#include "hsprior/hmc.hpp"
#include "hsprior/inference.hpp"
#include "hsprior/stats.hpp"

namespace hsprior {
namespace {

constexpr int kMaxInitAttempts = 100;

Eigen::MatrixXd as_chains(const Eigen::VectorXd& column, int chains, int per_chain) {
  return Eigen::Map<const Eigen::MatrixXd>(column.data(), per_chain, chains);
}

ParameterSummary summarize(const std::string& name, const Eigen::VectorXd& values, int chains,
                           int per_chain) {
  std::vector<double> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end());
  ParameterSummary s;
  s.name = name;
  s.mean = values.mean();
  s.sd = values.size() > 1 ? std::sqrt(stats::variance(v)) : 0.0;
  s.q05 = stats::quantile_sorted(v, 0.05);
  s.q50 = stats::quantile_sorted(v, 0.5);
  s.q95 = stats::quantile_sorted(v, 0.95);
  const auto diag = convergence(as_chains(values, chains, per_chain));
  s.rhat = diag.rhat;
  s.ess_bulk = diag.ess_bulk;
  s.ess_tail = diag.ess_tail;
  return s;
}

double log_mean_exp(const Eigen::VectorXd& x) {
  const double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.array() - m).exp().mean());
}

}  // namespace

std::vector<ParameterSummary> summarize_parameters(const PosteriorDraws& draws) {
  const int C = draws.num_chains, N = draws.draws_per_chain;
  std::vector<ParameterSummary> out;
  auto varies = [](const Eigen::VectorXd& v) { return v.size() > 0 && v.maxCoeff() != v.minCoeff(); };
  for (Eigen::Index j = 0; j < draws.D(); ++j)
    out.push_back(summarize("beta[" + std::to_string(j + 1) + "]", draws.beta.col(j), C, N));
  for (Eigen::Index j = 0; j < draws.D(); ++j) {
    const Eigen::VectorXd col = draws.lambda.col(j);
    if (varies(col)) out.push_back(summarize("lambda[" + std::to_string(j + 1) + "]", col, C, N));
  }
  if (varies(draws.tau)) out.push_back(summarize("tau", draws.tau, C, N));
  if (draws.has_sigma() && varies(draws.sigma)) out.push_back(summarize("sigma", draws.sigma, C, N));
  if (varies(draws.intercept)) out.push_back(summarize("intercept", draws.intercept, C, N));
  return out;
}

FitResult fit(const ModelSpec& spec, const Dataset& data, const SamplerSettings& settings,
              Execution exec) {
  settings.validate();
  const auto start = std::chrono::steady_clock::now();
  const LogPosterior target(spec, data);
  const LogDensityFn density = [&target](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    return target.evaluate(theta, grad);
  };

  HmcConfig config;
  config.warmup = settings.warmup();
  config.draws = settings.draws_per_chain();
  config.target_accept = settings.target_accept;
  config.max_leapfrog = settings.max_leapfrog;

  std::vector<HmcChainOutput> outputs(static_cast<std::size_t>(settings.chains));
  kernels::for_each_task(exec, settings.chains, [&](long c) {
    RngStream rng(settings.seed, static_cast<std::uint64_t>(c));
    Eigen::VectorXd theta, grad;
    bool ok = false;
    for (int attempt = 0; attempt < kMaxInitAttempts && !ok; ++attempt) {
      theta = target.initial_point(rng);
      const double lp = target.evaluate(theta, grad);
      ok = std::isfinite(lp) && grad.allFinite();
    }
    if (!ok)
      throw SamplerError("chain " + std::to_string(c) + ": no finite initial point after " +
                         std::to_string(kMaxInitAttempts) + " attempts");
    outputs[static_cast<std::size_t>(c)] = run_hmc_chain(density, theta, config, rng);
  });

  const int C = settings.chains, N = config.draws;
  const Eigen::Index D = data.D(), total = static_cast<Eigen::Index>(C) * N;
  FitResult result;
  PosteriorDraws& d = result.draws;
  d.likelihood = spec.likelihood;
  d.num_chains = C;
  d.draws_per_chain = N;
  d.beta.resize(total, D);
  d.lambda.resize(total, D);
  d.intercept.resize(total);
  d.tau.resize(total);
  if (spec.likelihood == LikelihoodKind::gaussian) d.sigma.resize(total);
  d.chain.resize(static_cast<std::size_t>(total));
  d.iteration.resize(static_cast<std::size_t>(total));
  d.divergent.resize(static_cast<std::size_t>(total));

  for (int c = 0; c < C; ++c) {
    const auto& out = outputs[static_cast<std::size_t>(c)];
    long divergent = 0;
    for (int i = 0; i < N; ++i) {
      const Eigen::Index row = static_cast<Eigen::Index>(c) * N + i;
      const ModelParameters p = target.unpack(out.samples.row(i).transpose());
      d.beta.row(row) = p.beta.transpose();
      d.lambda.row(row) = p.lambda.transpose();
      d.tau(row) = p.tau;
      d.intercept(row) = p.intercept;
      if (d.has_sigma()) d.sigma(row) = p.sigma;
      d.chain[static_cast<std::size_t>(row)] = c;
      d.iteration[static_cast<std::size_t>(row)] = i;
      d.divergent[static_cast<std::size_t>(row)] = out.divergent[static_cast<std::size_t>(i)];
      divergent += out.divergent[static_cast<std::size_t>(i)];
    }
    if (divergent == N)
      throw SamplerError("chain " + std::to_string(c) + ": every post-warmup transition diverged");
    double accept = 0.0;
    for (double a : out.accept_stat) accept += a;
    result.chains.push_back({out.step_size, out.trajectory_length, accept / N, divergent,
                             out.warmup_divergences, out.leapfrog_steps});
    result.divergences += divergent;
  }

  result.parameters = summarize_parameters(d);
  result.max_rhat = 0.0;
  result.min_ess_bulk = std::numeric_limits<double>::infinity();
  for (const auto& p : result.parameters) {
    if (std::isfinite(p.rhat)) result.max_rhat = std::max(result.max_rhat, p.rhat);
    if (std::isfinite(p.ess_bulk)) result.min_ess_bulk = std::min(result.min_ess_bulk, p.ess_bulk);
  }
  if (!std::isfinite(result.min_ess_bulk)) result.min_ess_bulk = 0.0;
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

PosteriorShrinkage posterior_shrinkage_profile(const PosteriorDraws& draws,
                                               const DesignScale& scale) {
  scale.validate();
  if (draws.size() == 0) throw std::invalid_argument("posterior_shrinkage_profile: no draws");
  const Eigen::Index S = draws.size(), D = draws.D();
  const double root_n = std::sqrt(static_cast<double>(scale.n));
  PosteriorShrinkage out;
  out.m_eff.resize(S);
  out.mean_kappa = Eigen::VectorXd::Zero(D);
  for (Eigen::Index s = 0; s < S; ++s) {
    const double sigma = draws.has_sigma() ? draws.sigma(s) : logistic_sigma_plugin();
    const double u = draws.tau(s) * root_n / sigma;
    double m = 0.0;
    for (Eigen::Index j = 0; j < D; ++j) {
      const double ul = u * draws.lambda(s, j);
      const double kappa = 1.0 / (1.0 + ul * ul);
      out.mean_kappa(j) += kappa;
      m += 1.0 - kappa;
    }
    out.m_eff(s) = m;
  }
  out.mean_kappa /= static_cast<double>(S);
  out.mean = out.m_eff.mean();
  std::vector<double> sorted(out.m_eff.data(), out.m_eff.data() + S);
  std::sort(sorted.begin(), sorted.end());
  for (double p : {0.05, 0.25, 0.5, 0.75, 0.95})
    out.quantiles.emplace_back(p, stats::quantile_sorted(sorted, p));
  return out;
}

PredictiveSummary predict(const PosteriorDraws& draws, const Eigen::MatrixXd& X_new,
                          const Eigen::VectorXd* y_new) {
  if (X_new.cols() != draws.D())
    throw std::invalid_argument("predict: X_new has " + std::to_string(X_new.cols()) +
                                " columns, model has " + std::to_string(draws.D()));
  if (y_new && y_new->size() != X_new.rows())
    throw std::invalid_argument("predict: y_new length differs from rows of X_new");
  if (draws.size() == 0) throw std::invalid_argument("predict: no draws");
  const Eigen::Index n = X_new.rows(), S = draws.size();
  const bool gaussian = draws.likelihood == LikelihoodKind::gaussian;

  Eigen::MatrixXd F = X_new * draws.beta.transpose();  // n x S
  F.rowwise() += draws.intercept.transpose();

  PredictiveSummary out;
  if (gaussian) {
    out.mean_prediction = F.rowwise().mean();
  } else {
    out.mean_prediction = F.unaryExpr([](double f) { return logistic(f); }).rowwise().mean();
  }
  if (!y_new) return out;

  out.log_predictive.resize(n);
  Eigen::VectorXd lp(S);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = (*y_new)(i);
    for (Eigen::Index s = 0; s < S; ++s) {
      const double f = F(i, s);
      if (gaussian) {
        const double sigma = draws.sigma(s);
        const double r = (y - f) / sigma;
        lp(s) = -0.5 * r * r - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
      } else {
        lp(s) = y * f - softplus(f);
      }
    }
    out.log_predictive(i) = log_mean_exp(lp);
  }
  out.mlpd = n > 0 ? out.log_predictive.mean() : 0.0;
  out.mse = n > 0 ? (*y_new - out.mean_prediction).squaredNorm() / static_cast<double>(n) : 0.0;
  return out;
}

}  // namespace hsprior
