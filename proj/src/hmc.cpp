#include "hsprior/hmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "hsprior/error.hpp"

namespace hsprior {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct PhaseState {
  Eigen::VectorXd theta;
  Eigen::VectorXd grad;
  double log_density = kNegInf;
};

struct WarmupSchedule {
  bool adapt_metric = false;
  int term_start = 0;  // first iteration of the terminal fast window
  std::vector<std::pair<int, int>> slow_windows;
};

WarmupSchedule make_schedule(int warmup) {
  WarmupSchedule s;
  s.term_start = warmup / 2;
  if (warmup < 20) return s;
  int init = 75, term = 50, base = 25;
  if (init + term + base > warmup) {
    init = static_cast<int>(0.15 * warmup);
    term = static_cast<int>(0.1 * warmup);
    base = warmup - init - term;
  }
  s.adapt_metric = true;
  s.term_start = warmup - term;
  int start = init, size = base;
  while (start < s.term_start) {
    int end = start + size;
    if (end + 2 * size > s.term_start) end = s.term_start;
    s.slow_windows.emplace_back(start, end);
    start = end;
    size *= 2;
  }
  return s;
}

double kinetic(const Eigen::VectorXd& p, const Eigen::VectorXd& inv_metric) {
  return 0.5 * p.cwiseProduct(p).dot(inv_metric);
}

Eigen::VectorXd draw_momentum(const Eigen::VectorXd& inv_metric, RngStream& rng) {
  Eigen::VectorXd p(inv_metric.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = rng.standard_normal() / std::sqrt(inv_metric(i));
  return p;
}

/// In-place leapfrog step; returns false on a non-finite density.
bool leapfrog(const LogDensityFn& target, PhaseState& s, Eigen::VectorXd& p, double eps,
              const Eigen::VectorXd& inv_metric) {
  p.noalias() += 0.5 * eps * s.grad;
  s.theta.noalias() += eps * inv_metric.cwiseProduct(p);
  s.log_density = target(s.theta, s.grad);
  if (!std::isfinite(s.log_density) || !s.grad.allFinite()) return false;
  p.noalias() += 0.5 * eps * s.grad;
  return true;
}

double find_reasonable_step(const LogDensityFn& target, const PhaseState& start, double eps,
                            const Eigen::VectorXd& inv_metric, RngStream& rng) {
  const Eigen::VectorXd p0 = draw_momentum(inv_metric, rng);
  const double h0 = -start.log_density + kinetic(p0, inv_metric);
  auto log_ratio = [&](double e) {
    PhaseState s = start;
    Eigen::VectorXd p = p0;
    if (!leapfrog(target, s, p, e, inv_metric)) return kNegInf;
    const double h = -s.log_density + kinetic(p, inv_metric);
    return std::isfinite(h) ? h0 - h : kNegInf;
  };
  const double threshold = std::log(0.8);
  const int direction = log_ratio(eps) > threshold ? 1 : -1;
  for (int k = 0; k < 60; ++k) {
    const double next = direction == 1 ? 2.0 * eps : 0.5 * eps;
    const double r = log_ratio(next);
    if (direction == 1 && !(r > threshold)) break;
    eps = next;
    if (direction == -1 && r > threshold) break;
  }
  return std::clamp(eps, 1e-10, 1e3);
}

}  // namespace

DualAveraging::DualAveraging(double initial_step, double target) : target_(target) {
  restart(initial_step);
}

void DualAveraging::restart(double initial_step) {
  mu_ = std::log(10.0 * initial_step);
  x_bar_ = 0.0;
  h_bar_ = 0.0;
  counter_ = 0;
}

double DualAveraging::update(double accept_stat) {
  constexpr double gamma = 0.05, t0 = 10.0, kappa = 0.75;
  ++counter_;
  const double c = static_cast<double>(counter_);
  const double eta = 1.0 / (c + t0);
  h_bar_ = (1.0 - eta) * h_bar_ + eta * (target_ - accept_stat);
  const double x = mu_ - std::sqrt(c) / gamma * h_bar_;
  const double w = std::pow(c, -kappa);
  x_bar_ = w * x + (1.0 - w) * x_bar_;
  return std::exp(x);
}

double DualAveraging::final_step() const { return std::exp(x_bar_); }

HmcChainOutput run_hmc_chain(const LogDensityFn& target, Eigen::VectorXd init,
                             const HmcConfig& config, RngStream& rng) {
  detail::require(config.warmup >= 0 && config.draws >= 1, "run_hmc_chain: bad iteration counts");
  detail::require(config.target_accept > 0.0 && config.target_accept < 1.0,
                  "run_hmc_chain: target_accept must lie in (0, 1)");
  detail::require(config.max_leapfrog >= 1, "run_hmc_chain: max_leapfrog must be >= 1");
  const Eigen::Index dim = init.size();

  PhaseState state{std::move(init), Eigen::VectorXd::Zero(dim), kNegInf};
  state.log_density = target(state.theta, state.grad);
  if (!std::isfinite(state.log_density) || !state.grad.allFinite())
    throw SamplerError("run_hmc_chain: non-finite log density at the initial point");

  HmcChainOutput out;
  out.inverse_metric = Eigen::VectorXd::Ones(dim);
  out.samples.resize(config.draws, dim);
  out.divergent.assign(static_cast<std::size_t>(config.draws), 0);
  out.accept_stat.assign(static_cast<std::size_t>(config.draws), 0.0);
  out.leapfrog_per_draw.assign(static_cast<std::size_t>(config.draws), 0);

  const WarmupSchedule schedule = make_schedule(config.warmup);
  double eps = find_reasonable_step(target, state, 1.0, out.inverse_metric, rng);
  DualAveraging adapter(eps, config.target_accept);

  // Welford accumulators for the current slow window.
  Eigen::VectorXd w_mean = Eigen::VectorXd::Zero(dim), w_m2 = Eigen::VectorXd::Zero(dim);
  long w_count = 0;
  std::size_t window_index = 0;
  // U-turn integration times since the last metric update; at the end of
  // warmup these come from the terminal window.
  std::vector<double> uturn_times;
  int n_steps_nominal = std::min(config.max_leapfrog, 10);
  auto median_steps = [&] {
    std::vector<double> t = uturn_times;
    std::nth_element(t.begin(), t.begin() + t.size() / 2, t.end());
    return std::clamp(static_cast<int>(std::lround(t[t.size() / 2] / eps)), 1, config.max_leapfrog);
  };

  const int total = config.warmup + config.draws;
  for (int it = 0; it < total; ++it) {
    const bool warming = it < config.warmup;
    if (it == config.warmup) {
      if (config.warmup > 0) eps = adapter.final_step();
      if (!uturn_times.empty()) n_steps_nominal = median_steps();
      out.trajectory_length = n_steps_nominal;
    } else if (warming && !uturn_times.empty()) {
      n_steps_nominal = median_steps();
    }

    const int lo = std::max(1, static_cast<int>(std::floor(0.5 * n_steps_nominal)));
    const int hi = std::max(lo, static_cast<int>(std::ceil(1.5 * n_steps_nominal)));
    const int steps = std::min(config.max_leapfrog,
                               lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)));

    // The move is always the fixed-length jittered trajectory, which keeps
    // every transition reversible. During warmup the integration continues
    // past the proposal until the first U-turn, only to measure its time.
    Eigen::VectorXd p = draw_momentum(out.inverse_metric, rng);
    const double h0 = -state.log_density + kinetic(p, out.inverse_metric);
    PhaseState current = state;
    PhaseState proposal;
    bool divergent = false;
    double h = h0;
    double uturn_time = -1.0;
    int taken = 0;
    const int horizon = warming ? config.max_leapfrog : steps;
    for (int k = 1; k <= horizon; ++k) {
      ++taken;
      bool bad = !leapfrog(target, current, p, eps, out.inverse_metric);
      double hk = h0;
      if (!bad) {
        hk = -current.log_density + kinetic(p, out.inverse_metric);
        bad = !std::isfinite(hk) || hk - h0 > config.divergence_threshold;
      }
      if (bad) {
        divergent = k <= steps;
        break;
      }
      if (k == steps) {
        proposal = current;
        h = hk;
      }
      if (warming && uturn_time < 0.0 &&
          ((current.theta - state.theta).dot(out.inverse_metric.cwiseProduct(p)) < 0.0 ||
           k == horizon))
        uturn_time = k * eps;
      if (k >= steps && (!warming || uturn_time >= 0.0)) break;
    }
    out.leapfrog_steps += taken;

    const double accept = divergent ? 0.0 : std::min(1.0, std::exp(h0 - h));
    if (!divergent && rng.uniform_open() < accept) state = std::move(proposal);

    if (warming) {
      if (divergent) ++out.warmup_divergences;
      if (uturn_time >= 0.0) uturn_times.push_back(uturn_time);
      eps = adapter.update(accept);

      if (schedule.adapt_metric && window_index < schedule.slow_windows.size()) {
        const auto [begin, end] = schedule.slow_windows[window_index];
        if (it >= begin && it < end) {
          ++w_count;
          const Eigen::VectorXd delta = state.theta - w_mean;
          w_mean += delta / static_cast<double>(w_count);
          w_m2 += delta.cwiseProduct(state.theta - w_mean);
        }
        if (it == end - 1) {
          const double n = static_cast<double>(w_count);
          if (w_count >= 2) {
            const Eigen::VectorXd var = w_m2 / (n - 1.0);
            out.inverse_metric = (n / (n + 5.0)) * var.array() + 1e-3 * (5.0 / (n + 5.0));
          }
          w_mean.setZero();
          w_m2.setZero();
          w_count = 0;
          ++window_index;
          uturn_times.clear();
          eps = find_reasonable_step(target, state, eps, out.inverse_metric, rng);
          adapter.restart(eps);
        }
      }
    } else {
      const auto d = static_cast<std::size_t>(it - config.warmup);
      out.samples.row(static_cast<Eigen::Index>(d)) = state.theta.transpose();
      out.divergent[d] = divergent ? 1 : 0;
      out.accept_stat[d] = accept;
      out.leapfrog_per_draw[d] = taken;
    }
  }
  out.step_size = eps;
  return out;
}

}  // namespace hsprior
