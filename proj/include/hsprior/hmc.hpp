#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "hsprior/distributions.hpp"

namespace hsprior {

/// Log density and gradient of a target. May return a non-finite value, which
/// the sampler treats as a divergence.
using LogDensityFn = std::function<double(const Eigen::VectorXd& theta, Eigen::VectorXd& grad)>;

struct HmcConfig {
  int warmup = 500;
  int draws = 500;
  double target_accept = 0.99;
  int max_leapfrog = 512;
  double divergence_threshold = 1000.0;
};

struct HmcChainOutput {
  Eigen::MatrixXd samples;  // draws x dim
  std::vector<std::uint8_t> divergent;
  std::vector<double> accept_stat;
  std::vector<int> leapfrog_per_draw;
  double step_size = 0.0;
  int trajectory_length = 0;
  Eigen::VectorXd inverse_metric;
  long warmup_divergences = 0;
  long leapfrog_steps = 0;
};

/// One HMC chain with diagonal metric.
///
/// Warmup follows the windowed schedule (fast / doubling slow windows / fast):
/// dual averaging tunes the step size toward `target_accept` and the slow
/// windows estimate the diagonal metric. Every transition moves along a
/// trajectory of uniformly jittered length in [0.5 L, 1.5 L]; during warmup
/// the integration continues to the first U-turn and L tracks the median
/// U-turn time since the last metric update, so the terminal window
/// calibrates the L used for sampling.
/// A transition is divergent when the energy error exceeds the threshold.
HmcChainOutput run_hmc_chain(const LogDensityFn& target, Eigen::VectorXd init,
                             const HmcConfig& config, RngStream& rng);

/// Dual-averaging step-size adaptation.
class DualAveraging {
 public:
  explicit DualAveraging(double initial_step, double target);
  void restart(double initial_step);
  double update(double accept_stat);  // returns the next step size
  double final_step() const;

 private:
  double target_;
  double mu_ = 0.0;
  double x_bar_ = 0.0;
  double h_bar_ = 0.0;
  long counter_ = 0;
};

}  // namespace hsprior
