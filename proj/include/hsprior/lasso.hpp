#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "hsprior/dataset.hpp"
#include "hsprior/glm_approx.hpp"

namespace hsprior {

struct LassoFit {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  double penalty = 0.0;
  long p_lasso = 0;  // number of nonzero coefficients
  /// RSS / (n - p_lasso); empty for logistic fits and when n <= p_lasso.
  std::optional<double> noise_variance;
  bool degenerate_variance = false;
  double training_mse = 0.0;
  int iterations = 0;
};

struct LassoOptions {
  double tolerance = 1e-10;  // on the KKT residual
  int max_sweeps = 100000;
};

/// Minimizes deviance / (2n) + penalty * |beta|_1 with an unpenalized
/// intercept by cyclic coordinate descent. Logistic fits iterate weighted
/// quadratic approximations (IRLS weights) with a backtracking step on the
/// true objective, so the objective never increases. `warm_start` seeds the
/// coefficients and intercept. Throws NumericalError past the iteration cap.
LassoFit lasso_path_fit(const Dataset& data, LikelihoodKind kind, double penalty,
                        const LassoFit* warm_start = nullptr, const LassoOptions& options = {});

/// Penalized objective at the given solution.
double lasso_objective(const Dataset& data, LikelihoodKind kind, const LassoFit& fit);

/// Largest KKT violation of the penalized problem.
double lasso_kkt_residual(const Dataset& data, LikelihoodKind kind, const LassoFit& fit);

/// Smallest penalty giving the all-zero solution: max_j |x_j'(y - ybar)| / n.
double lasso_lambda_max(const Dataset& data);

struct LassoCvResult {
  LassoFit fit;
  std::vector<double> penalties;
  std::vector<double> cv_deviance;  // mean held-out deviance per penalty
  std::size_t selected = 0;
  std::vector<int> fold_of_row;
};

/// K-fold cross-validation over a log-spaced grid from lambda_max down to
/// 1e-3 * lambda_max (warm starts along the path), then a full-data refit at
/// the selected penalty. Folds come from a seeded permutation, stratified by
/// class for logistic data.
LassoCvResult lasso_cv(const Dataset& data, LikelihoodKind kind, int folds = 10, int grid = 100,
                       std::uint64_t seed = 0);

/// Held-out mean deviance: squared error (Gaussian) or -2 log likelihood (logistic).
double lasso_deviance(const LassoFit& fit, LikelihoodKind kind, const Eigen::MatrixXd& X,
                      const Eigen::VectorXd& y);

/// Mean log predictive density on held-out data. Gaussian fits use the
/// estimated noise variance, falling back to the training MSE when degenerate.
double lasso_mlpd(const LassoFit& fit, LikelihoodKind kind, const Eigen::MatrixXd& X,
                  const Eigen::VectorXd& y);

nlohmann::json to_json(const LassoFit& fit);

}  // namespace hsprior
