#include "hsprior/diagnostics.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "hsprior/stats.hpp"

namespace hsprior {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd split_chains(const Eigen::MatrixXd& draws) {
  const Eigen::Index half = draws.rows() / 2;
  const Eigen::Index offset = draws.rows() - half;  // drops the middle draw of odd chains
  Eigen::MatrixXd out(half, 2 * draws.cols());
  for (Eigen::Index c = 0; c < draws.cols(); ++c) {
    out.col(2 * c) = draws.col(c).head(half);
    out.col(2 * c + 1) = draws.col(c).segment(offset, half);
  }
  return out;
}

Eigen::MatrixXd rank_normalize(const Eigen::MatrixXd& x) {
  const std::span<const double> flat(x.data(), static_cast<std::size_t>(x.size()));
  const auto r = stats::ranks(flat);
  const double S = static_cast<double>(x.size());
  Eigen::MatrixXd z(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double p = (r[static_cast<std::size_t>(k)] - 0.375) / (S + 0.25);
    z.data()[k] = std::numbers::sqrt2 * boost::math::erf_inv(2.0 * p - 1.0);
  }
  return z;
}

bool is_constant(const Eigen::MatrixXd& x) { return x.maxCoeff() == x.minCoeff(); }

}  // namespace

Eigen::VectorXd autocovariance(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::Index m = 1;
  while (m < 2 * n) m *= 2;
  std::vector<double> padded(static_cast<std::size_t>(m), 0.0);
  const double mean = x.mean();
  for (Eigen::Index i = 0; i < n; ++i) padded[static_cast<std::size_t>(i)] = x(i) - mean;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> freq;
  fft.fwd(freq, padded);
  for (auto& f : freq) f = std::norm(f);
  std::vector<double> back;
  fft.inv(back, freq);
  Eigen::VectorXd acov(n);
  for (Eigen::Index t = 0; t < n; ++t) acov(t) = back[static_cast<std::size_t>(t)] / static_cast<double>(n);
  return acov;
}

double rhat_basic(const Eigen::MatrixXd& chains) {
  const double n = static_cast<double>(chains.rows());
  const Eigen::Index m = chains.cols();
  if (chains.rows() < 2 || m < 1) return kNaN;
  Eigen::VectorXd means(m), vars(m);
  for (Eigen::Index c = 0; c < m; ++c) {
    means(c) = chains.col(c).mean();
    vars(c) = (chains.col(c).array() - means(c)).square().sum() / (n - 1.0);
  }
  const double W = vars.mean();
  const double B_over_n = m > 1 ? (means.array() - means.mean()).square().sum() / (m - 1.0) : 0.0;
  const double var_plus = (n - 1.0) / n * W + B_over_n;
  return std::sqrt(var_plus / W);
}

double ess_basic(const Eigen::MatrixXd& chains) {
  const Eigen::Index n = chains.rows(), m = chains.cols();
  if (n < 4) return kNaN;
  const double nd = static_cast<double>(n);
  Eigen::MatrixXd acov(n, m);
  Eigen::VectorXd means(m), vars(m);
  for (Eigen::Index c = 0; c < m; ++c) {
    acov.col(c) = autocovariance(chains.col(c));
    means(c) = chains.col(c).mean();
    vars(c) = acov(0, c) * nd / (nd - 1.0);
  }
  const double mean_var = vars.mean();
  double var_plus = mean_var * (nd - 1.0) / nd;
  if (m > 1) var_plus += (means.array() - means.mean()).square().sum() / (m - 1.0);
  const Eigen::VectorXd acov_mean = acov.rowwise().mean();
  auto rho = [&](Eigen::Index t) { return 1.0 - (mean_var - acov_mean(t)) / var_plus; };

  Eigen::VectorXd rho_hat = Eigen::VectorXd::Zero(n);
  double rho_even = 1.0, rho_odd = rho(1);
  rho_hat(0) = rho_even;
  rho_hat(1) = rho_odd;
  Eigen::Index s = 1;
  while (s < n - 4 && rho_even + rho_odd > 0.0) {
    rho_even = rho(s + 1);
    rho_odd = rho(s + 2);
    if (rho_even + rho_odd >= 0.0) {
      rho_hat(s + 1) = rho_even;
      rho_hat(s + 2) = rho_odd;
    }
    s += 2;
  }
  const Eigen::Index max_s = s;
  if (rho_even > 0.0) rho_hat(max_s + 1) = rho_even;
  for (Eigen::Index k = 1; k <= max_s - 3; k += 2) {
    if (rho_hat(k + 1) + rho_hat(k + 2) > rho_hat(k - 1) + rho_hat(k)) {
      rho_hat(k + 1) = 0.5 * (rho_hat(k - 1) + rho_hat(k));
      rho_hat(k + 2) = rho_hat(k + 1);
    }
  }
  const double total = nd * static_cast<double>(m);
  const double tau = -1.0 + 2.0 * rho_hat.head(max_s).sum() + rho_hat(max_s + 1);
  return std::min(total / tau, total * std::log10(total));
}

ConvergenceDiagnostics convergence(const Eigen::MatrixXd& draws) {
  if (draws.size() == 0 || is_constant(draws) || draws.rows() < 4) return {kNaN, kNaN, kNaN};
  const Eigen::MatrixXd split = split_chains(draws);
  const Eigen::MatrixXd z = rank_normalize(split);
  const double rhat_bulk = rhat_basic(z);

  std::vector<double> flat(draws.data(), draws.data() + draws.size());
  const double med = stats::quantile(flat, 0.5);
  const Eigen::MatrixXd folded = rank_normalize((split.array() - med).abs().matrix());
  const double rhat_tail = rhat_basic(folded);

  const double ess_bulk = ess_basic(z);
  double ess_tail = kNaN;
  {
    const double q05 = stats::quantile(flat, 0.05), q95 = stats::quantile(flat, 0.95);
    const Eigen::MatrixXd lo = (split.array() <= q05).cast<double>();
    const Eigen::MatrixXd hi = (split.array() <= q95).cast<double>();
    if (!is_constant(lo) && !is_constant(hi)) ess_tail = std::min(ess_basic(lo), ess_basic(hi));
  }
  return {std::max(rhat_bulk, rhat_tail), ess_bulk, ess_tail};
}

}  // namespace hsprior
