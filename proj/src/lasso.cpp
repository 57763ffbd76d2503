#include "hsprior/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "hsprior/distributions.hpp"
#include "hsprior/error.hpp"

namespace hsprior {
namespace {

constexpr int kMaxOuterIterations = 500;

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

struct Solution {
  Eigen::VectorXd beta;
  double b0 = 0.0;
};

/// Cyclic coordinate descent on
///   (1/2n) sum_i w_i (z_i - b0 - x_i'beta)^2 + penalty |beta|_1
/// until the largest coordinate move (in weighted-norm units) drops below `tol`.
int weighted_cd(const Eigen::MatrixXd& X, const Eigen::VectorXd& z, const Eigen::VectorXd& w,
                double penalty, Solution& s, double tol, int max_sweeps) {
  const Eigen::Index n = X.rows(), D = X.cols();
  const double dn = static_cast<double>(n);
  const Eigen::VectorXd col_curv = (X.array().square().colwise() * w.array()).colwise().sum() / dn;
  const double w_sum = w.sum();
  Eigen::VectorXd r = z - X * s.beta;
  r.array() -= s.b0;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double max_move = 0.0;
    const double db0 = w.dot(r) / w_sum;
    s.b0 += db0;
    r.array() -= db0;
    max_move = std::max(max_move, std::abs(db0) * std::sqrt(w_sum / dn));
    for (Eigen::Index j = 0; j < D; ++j) {
      const double c = col_curv(j);
      if (c <= 0.0) continue;
      const double old = s.beta(j);
      const double rho = X.col(j).cwiseProduct(w).dot(r) / dn + c * old;
      const double next = soft_threshold(rho, penalty) / c;
      if (next != old) {
        r.noalias() -= (next - old) * X.col(j);
        s.beta(j) = next;
        max_move = std::max(max_move, std::abs(next - old) * std::sqrt(c));
      }
    }
    if (max_move < tol) return sweep;
  }
  return -1;
}

Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta, double b0) {
  Eigen::VectorXd f = X * beta;
  f.array() += b0;
  return f;
}

double smooth_loss(LikelihoodKind kind, const Eigen::VectorXd& f, const Eigen::VectorXd& y) {
  const double n = static_cast<double>(y.size());
  if (kind == LikelihoodKind::gaussian) return 0.5 * (y - f).squaredNorm() / n;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) loss += softplus(f(i)) - y(i) * f(i);
  return loss / n;
}

/// Gradient of the smooth part with respect to the linear predictor, times n.
Eigen::VectorXd neg_residual(LikelihoodKind kind, const Eigen::VectorXd& f,
                             const Eigen::VectorXd& y) {
  if (kind == LikelihoodKind::gaussian) return f - y;
  return f.unaryExpr([](double v) { return logistic(v); }) - y;
}

double kkt_residual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, LikelihoodKind kind,
                    const Eigen::VectorXd& beta, double b0, double penalty) {
  const double n = static_cast<double>(y.size());
  const Eigen::VectorXd g_f = neg_residual(kind, linear_predictor(X, beta, b0), y);
  const Eigen::VectorXd g = X.transpose() * g_f / n;
  double worst = std::abs(g_f.sum() / n);
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double v = beta(j) == 0.0 ? std::max(0.0, std::abs(g(j)) - penalty)
                                    : std::abs(g(j) + penalty * (beta(j) > 0.0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

double penalized(LikelihoodKind kind, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 const Solution& s, double penalty) {
  return smooth_loss(kind, linear_predictor(X, s.beta, s.b0), y) + penalty * s.beta.lpNorm<1>();
}

LassoFit finish(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, LikelihoodKind kind,
                const Solution& s, double penalty, int iterations) {
  LassoFit fit;
  fit.coefficients = s.beta;
  fit.intercept = s.b0;
  fit.penalty = penalty;
  fit.iterations = iterations;
  fit.p_lasso = static_cast<long>((s.beta.array() != 0.0).count());
  const Eigen::Index n = y.size();
  if (kind == LikelihoodKind::gaussian) {
    const double rss = (y - linear_predictor(X, s.beta, s.b0)).squaredNorm();
    fit.training_mse = n > 0 ? rss / static_cast<double>(n) : 0.0;
    if (n > fit.p_lasso && rss > 0.0)
      fit.noise_variance = rss / static_cast<double>(n - fit.p_lasso);
    else
      fit.degenerate_variance = true;
  }
  return fit;
}

LassoFit fit_arrays(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, LikelihoodKind kind,
                    double penalty, const LassoFit* warm_start, const LassoOptions& options) {
  const Eigen::Index n = X.rows(), D = X.cols();
  detail::require(n >= 1 && D >= 1, "lasso: empty data");
  detail::require(y.size() == n, "lasso: targets and predictors differ in length");
  detail::require(penalty > 0.0 && std::isfinite(penalty), "lasso: penalty must be positive");
  detail::require(options.tolerance > 0.0 && options.max_sweeps >= 1, "lasso: bad options");

  Solution s{Eigen::VectorXd::Zero(D), 0.0};
  if (warm_start) {
    detail::require(warm_start->coefficients.size() == D, "lasso: warm start has wrong length");
    s.beta = warm_start->coefficients;
    s.b0 = warm_start->intercept;
  } else if (kind == LikelihoodKind::gaussian) {
    s.b0 = y.mean();
  } else {
    const double ybar = std::clamp(y.mean(), 1e-6, 1.0 - 1e-6);
    s.b0 = std::log(ybar / (1.0 - ybar));
  }

  const double inner_tol = 0.1 * options.tolerance;
  if (kind == LikelihoodKind::gaussian) {
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    int total = 0;
    while (total < options.max_sweeps) {
      const int used = weighted_cd(X, y, w, penalty, s, inner_tol, options.max_sweeps - total);
      total += used < 0 ? options.max_sweeps - total : used;
      if (kkt_residual(X, y, kind, s.beta, s.b0, penalty) < options.tolerance)
        return finish(X, y, kind, s, penalty, total);
      if (used < 0) break;
    }
    throw NumericalError("lasso: no convergence after " + std::to_string(options.max_sweeps) +
                         " sweeps at penalty " + std::to_string(penalty));
  }

  int total = 0;
  double objective = penalized(kind, X, y, s, penalty);
  for (int outer = 0; outer < kMaxOuterIterations && total < options.max_sweeps; ++outer) {
    if (kkt_residual(X, y, kind, s.beta, s.b0, penalty) < options.tolerance)
      return finish(X, y, kind, s, penalty, total);
    const Eigen::VectorXd f = linear_predictor(X, s.beta, s.b0);
    Eigen::VectorXd w(n), z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = logistic(f(i));
      w(i) = std::max(p * (1.0 - p), 1e-5);
      z(i) = f(i) + (y(i) - p) / w(i);
    }
    Solution next = s;
    const int used = weighted_cd(X, z, w, penalty, next, inner_tol, options.max_sweeps - total);
    total += used < 0 ? options.max_sweeps - total : used;

    // Backtrack along the step until the true objective does not increase
    // beyond round-off.
    const double slack = 1e-13 * std::max(1.0, std::abs(objective));
    double t = 1.0;
    Solution trial = next;
    double trial_obj = penalized(kind, X, y, trial, penalty);
    while (trial_obj > objective + slack && t > 1e-12) {
      t *= 0.5;
      trial.beta = s.beta + t * (next.beta - s.beta);
      trial.b0 = s.b0 + t * (next.b0 - s.b0);
      trial_obj = penalized(kind, X, y, trial, penalty);
    }
    if (trial_obj > objective + slack) break;
    s = trial;
    objective = trial_obj;
  }
  if (kkt_residual(X, y, kind, s.beta, s.b0, penalty) < options.tolerance)
    return finish(X, y, kind, s, penalty, total);
  throw NumericalError("lasso: no convergence within the iteration cap at penalty " +
                       std::to_string(penalty));
}

double lambda_max_arrays(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::VectorXd centered = y.array() - y.mean();
  return (X.transpose() * centered).cwiseAbs().maxCoeff() / static_cast<double>(y.size());
}

std::vector<int> assign_folds(const Eigen::VectorXd& y, LikelihoodKind kind, int folds,
                              std::uint64_t seed) {
  const Eigen::Index n = y.size();
  RngStream rng(seed, 0);
  std::vector<int> fold(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<Eigen::Index>> groups;
  if (kind == LikelihoodKind::bernoulli_logit) {
    groups.resize(2);
    for (Eigen::Index i = 0; i < n; ++i) groups[y(i) == 1.0 ? 1 : 0].push_back(i);
  } else {
    groups.resize(1);
    groups[0].resize(static_cast<std::size_t>(n));
    std::iota(groups[0].begin(), groups[0].end(), Eigen::Index{0});
  }
  int next = 0;
  for (auto& g : groups) {
    std::shuffle(g.begin(), g.end(), rng);
    for (Eigen::Index i : g) {
      fold[static_cast<std::size_t>(i)] = next;
      next = (next + 1) % folds;
    }
  }
  return fold;
}

}  // namespace

LassoFit lasso_path_fit(const Dataset& data, LikelihoodKind kind, double penalty,
                        const LassoFit* warm_start, const LassoOptions& options) {
  return fit_arrays(data.X, data.y, kind, penalty, warm_start, options);
}

double lasso_objective(const Dataset& data, LikelihoodKind kind, const LassoFit& fit) {
  return penalized(kind, data.X, data.y, Solution{fit.coefficients, fit.intercept}, fit.penalty);
}

double lasso_kkt_residual(const Dataset& data, LikelihoodKind kind, const LassoFit& fit) {
  return kkt_residual(data.X, data.y, kind, fit.coefficients, fit.intercept, fit.penalty);
}

double lasso_lambda_max(const Dataset& data) {
  detail::require(data.n() >= 1, "lasso: empty data");
  return lambda_max_arrays(data.X, data.y);
}

double lasso_deviance(const LassoFit& fit, LikelihoodKind kind, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& y) {
  detail::require(X.rows() == y.size() && y.size() > 0, "lasso_deviance: bad held-out data");
  return 2.0 * smooth_loss(kind, linear_predictor(X, fit.coefficients, fit.intercept), y);
}

double lasso_mlpd(const LassoFit& fit, LikelihoodKind kind, const Eigen::MatrixXd& X,
                  const Eigen::VectorXd& y) {
  detail::require(X.rows() == y.size() && y.size() > 0, "lasso_mlpd: bad held-out data");
  const Eigen::VectorXd f = linear_predictor(X, fit.coefficients, fit.intercept);
  const double n = static_cast<double>(y.size());
  if (kind == LikelihoodKind::bernoulli_logit) return -smooth_loss(kind, f, y);
  const double s2 = fit.noise_variance.value_or(fit.training_mse);
  detail::require(s2 > 0.0, "lasso_mlpd: no usable noise variance");
  return -0.5 * std::log(2.0 * std::numbers::pi * s2) - 0.5 * (y - f).squaredNorm() / (n * s2);
}

LassoCvResult lasso_cv(const Dataset& data, LikelihoodKind kind, int folds, int grid,
                       std::uint64_t seed) {
  const Eigen::Index n = data.n();
  detail::require(folds >= 2 && n >= folds, "lasso_cv: need n >= folds >= 2");
  detail::require(grid >= 1, "lasso_cv: grid must be positive");
  const double lmax = lasso_lambda_max(data);
  if (!(lmax > 0.0)) throw DataError("lasso_cv: targets are uncorrelated with every predictor");

  LassoCvResult out;
  out.penalties.resize(static_cast<std::size_t>(grid));
  for (int k = 0; k < grid; ++k) {
    const double frac = grid == 1 ? 0.0 : static_cast<double>(k) / (grid - 1);
    out.penalties[static_cast<std::size_t>(k)] = lmax * std::pow(1e-3, frac);
  }
  out.fold_of_row = assign_folds(data.y, kind, folds, seed);

  Eigen::MatrixXd fold_dev(grid, folds);
  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (Eigen::Index i = 0; i < n; ++i)
      (out.fold_of_row[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    const Eigen::MatrixXd Xtr = data.X(train, Eigen::all);
    const Eigen::VectorXd ytr = data.y(train);
    const Eigen::MatrixXd Xte = data.X(test, Eigen::all);
    const Eigen::VectorXd yte = data.y(test);
    LassoFit prev;
    for (int k = 0; k < grid; ++k) {
      prev = fit_arrays(Xtr, ytr, kind, out.penalties[static_cast<std::size_t>(k)],
                        k == 0 ? nullptr : &prev, {});
      fold_dev(k, f) = lasso_deviance(prev, kind, Xte, yte);
    }
  }
  const Eigen::VectorXd mean_dev = fold_dev.rowwise().mean();
  out.cv_deviance.assign(mean_dev.data(), mean_dev.data() + grid);
  Eigen::Index best = 0;
  mean_dev.minCoeff(&best);
  out.selected = static_cast<std::size_t>(best);

  LassoFit path;
  for (Eigen::Index k = 0; k <= best; ++k)
    path = lasso_path_fit(data, kind, out.penalties[static_cast<std::size_t>(k)],
                          k == 0 ? nullptr : &path);
  out.fit = path;
  return out;
}

nlohmann::json to_json(const LassoFit& fit) {
  nlohmann::json j;
  j["coefficients"] = std::vector<double>(fit.coefficients.data(),
                                          fit.coefficients.data() + fit.coefficients.size());
  j["intercept"] = fit.intercept;
  j["penalty"] = fit.penalty;
  j["p_lasso"] = fit.p_lasso;
  j["noise_variance"] = fit.noise_variance ? nlohmann::json(*fit.noise_variance) : nlohmann::json();
  j["degenerate_variance"] = fit.degenerate_variance;
  j["iterations"] = fit.iterations;
  return j;
}

}  // namespace hsprior
