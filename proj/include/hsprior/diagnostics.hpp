#pragma once

#include <Eigen/Dense>

namespace hsprior {

struct ConvergenceDiagnostics {
  double rhat;      // max of rank-normalized split bulk and folded R-hat
  double ess_bulk;
  double ess_tail;  // min ESS of the 5% and 95% quantile indicators
};

/// Diagnostics for one scalar quantity; `draws` is iterations x chains.
/// Returns NaN fields when every draw is identical.
ConvergenceDiagnostics convergence(const Eigen::MatrixXd& draws);

/// Classic split-free R-hat on already prepared chains (iterations x chains).
double rhat_basic(const Eigen::MatrixXd& chains);

/// Effective sample size with Geyer's initial monotone sequence (iterations x chains).
double ess_basic(const Eigen::MatrixXd& chains);

/// Within-chain autocovariance (biased, divisor N) for lags 0..N-1 via FFT.
Eigen::VectorXd autocovariance(const Eigen::VectorXd& x);

}  // namespace hsprior
