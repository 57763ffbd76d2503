#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsprior/dataset.hpp"
#include "hsprior/glm_approx.hpp"
#include "hsprior/kernels.hpp"
#include "hsprior/prior_design.hpp"

namespace hsprior {

/// Horseshoe-type regression model.
///
/// beta_j = z_j * tau * lambda_j with z_j ~ N(0, 1); tau and lambda_j follow
/// `prior`. The Gaussian likelihood carries p(sigma^2) ∝ 1/sigma^2 unless
/// `fixed_sigma` is set. The intercept is never shrunk.
struct ModelSpec {
  LikelihoodKind likelihood = LikelihoodKind::gaussian;
  PriorConfig prior;
  double intercept_prior_sd = 10.0;
  bool include_intercept = true;
  std::optional<double> fixed_sigma;

  void validate() const;
};

struct SamplerSettings {
  int chains = 4;
  int iterations = 1000;
  double warmup_fraction = 0.5;
  double target_accept = 0.99;
  int max_leapfrog = 512;
  std::uint64_t seed = 0;

  int warmup() const;
  int draws_per_chain() const { return iterations - warmup(); }
  void validate() const;
};

/// Position of each block of the unconstrained parameter vector.
struct ParameterLayout {
  Eigen::Index D = 0;
  bool sample_lambda = true;
  bool sample_tau = true;
  bool sample_sigma = true;
  bool intercept = true;

  Eigen::Index z() const { return 0; }
  Eigen::Index log_lambda() const { return D; }
  Eigen::Index log_tau() const { return D + (sample_lambda ? D : 0); }
  Eigen::Index log_sigma() const { return log_tau() + (sample_tau ? 1 : 0); }
  Eigen::Index intercept_index() const { return log_sigma() + (sample_sigma ? 1 : 0); }
  Eigen::Index size() const { return intercept_index() + (intercept ? 1 : 0); }
};

/// Constrained parameters for one point of the unconstrained space.
struct ModelParameters {
  Eigen::VectorXd beta;
  Eigen::VectorXd lambda;
  double tau = 0.0;
  double sigma = 1.0;
  double intercept = 0.0;
};

/// Joint log density of data and priors on the unconstrained space (log
/// transforms of lambda, tau, sigma with their Jacobians).
class LogPosterior {
 public:
  /// Keeps references to `data`, which must outlive this object.
  LogPosterior(const ModelSpec& spec, const Dataset& data);

  const ParameterLayout& layout() const { return layout_; }
  Eigen::Index dimension() const { return layout_.size(); }

  /// Value and gradient; returns a non-finite value instead of throwing.
  double evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const;

  ModelParameters unpack(const Eigen::VectorXd& theta) const;

  /// z, intercept ~ N(0, 0.1^2); log lambda and log tau at the prior medians;
  /// log sigma at log sd(y).
  Eigen::VectorXd initial_point(RngStream& rng) const;

 private:
  ModelSpec spec_;
  const Dataset& data_;
  ParameterLayout layout_;
  double sigma_init_ = 1.0;
};

struct LogPosteriorValue {
  double value;
  Eigen::VectorXd gradient;
};

/// Throws NumericalError naming the offending block when the value or any
/// gradient entry is non-finite.
LogPosteriorValue log_posterior_and_gradient(const ModelSpec& spec, const Dataset& data,
                                             const Eigen::VectorXd& theta);

/// Post-warmup draws of all chains, chain-major (all draws of chain 0 first).
struct PosteriorDraws {
  LikelihoodKind likelihood = LikelihoodKind::gaussian;
  Eigen::MatrixXd beta;    // draws x D
  Eigen::MatrixXd lambda;  // draws x D
  Eigen::VectorXd intercept;
  Eigen::VectorXd tau;
  Eigen::VectorXd sigma;  // empty for logistic models
  std::vector<int> chain;
  std::vector<int> iteration;
  std::vector<std::uint8_t> divergent;
  int num_chains = 0;
  int draws_per_chain = 0;

  Eigen::Index size() const { return tau.size(); }
  Eigen::Index D() const { return beta.cols(); }
  bool has_sigma() const { return sigma.size() > 0; }
};

struct ParameterSummary {
  std::string name;
  double mean;
  double sd;
  double q05;
  double q50;
  double q95;
  double rhat;
  double ess_bulk;
  double ess_tail;
};

struct ChainStats {
  double step_size;
  int trajectory_length;
  double mean_accept;
  long divergences;
  long warmup_divergences;
  long leapfrog_steps;
};

struct FitResult {
  PosteriorDraws draws;
  std::vector<ParameterSummary> parameters;
  std::vector<ChainStats> chains;
  double max_rhat = 0.0;
  double min_ess_bulk = 0.0;
  long divergences = 0;
  double wall_seconds = 0.0;
};

/// Runs independent chains (in parallel with Execution::parallel) with
/// streams (seed, chain). Throws SamplerError when every post-warmup
/// transition of a chain diverged or no finite initial point is found.
FitResult fit(const ModelSpec& spec, const Dataset& data, const SamplerSettings& settings,
              Execution exec = Execution::parallel);

std::vector<ParameterSummary> summarize_parameters(const PosteriorDraws& draws);

struct PosteriorShrinkage {
  Eigen::VectorXd m_eff;       // per draw
  Eigen::VectorXd mean_kappa;  // per coefficient, averaged over draws
  double mean = 0.0;
  std::vector<std::pair<double, double>> quantiles;
};

/// kappa_j per draw with the draw's sigma (the logistic plug-in sigma = 2 for
/// classification models), then m_eff = sum_j (1 - kappa_j).
PosteriorShrinkage posterior_shrinkage_profile(const PosteriorDraws& draws,
                                               const DesignScale& scale);

struct PredictiveSummary {
  Eigen::VectorXd mean_prediction;  // E[f] (Gaussian) or E[s(f)] (logistic)
  Eigen::VectorXd log_predictive;   // per point, empty without targets
  double mlpd = 0.0;
  double mse = 0.0;
};

/// Mean predictions for standardized X_new; with targets also the per-point
/// log of the draw-averaged predictive density, its mean (MLPD) and the MSE.
PredictiveSummary predict(const PosteriorDraws& draws, const Eigen::MatrixXd& X_new,
                          const Eigen::VectorXd* y_new = nullptr);

}  // namespace hsprior
