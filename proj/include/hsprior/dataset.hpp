#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hsprior {

enum class TargetKind { regression, classification };

TargetKind parse_target_kind(const std::string& name);

struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
};

struct Split {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};

/// Predictors, targets and the bookkeeping needed to standardize and split them.
///
/// After split_and_standardize, X holds all rows standardized with the
/// training-row statistics and `split` records which rows belong where.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  TargetKind kind = TargetKind::regression;
  std::vector<std::string> feature_names;
  std::string target_name = "y";
  std::optional<Standardization> standardization;
  std::optional<Split> split;
  std::vector<bool> constant_columns;
  /// X is the identity (normal-means model); likelihood code may skip the products.
  bool identity_design = false;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index D() const { return X.cols(); }
};

Dataset parse_csv(std::istream& in, const std::string& target, TargetKind kind);
Dataset load_csv(const std::filesystem::path& path, const std::string& target, TargetKind kind);

/// Seeded permutation split (stratified by class for classification) followed
/// by standardization of every row with the training statistics. Throws
/// DataError naming the columns whose training sd is zero.
Dataset split_and_standardize(const Dataset& data, double test_fraction, std::uint64_t seed);

/// Standardizes all rows with their own statistics; no split.
Dataset standardize(const Dataset& data);

Dataset select_rows(const Dataset& data, const std::vector<Eigen::Index>& rows);
Dataset train_part(const Dataset& data);
Dataset test_part(const Dataset& data);

Eigen::MatrixXd apply_standardization(const Eigen::MatrixXd& raw, const Standardization& s);
Eigen::MatrixXd undo_standardization(const Eigen::MatrixXd& standardized, const Standardization& s);

struct SyntheticProblem {
  Dataset data;
  Eigen::VectorXd beta;
  double intercept = 0.0;
};

/// Normal-means data: identity design, p_star entries of beta equal to A at
/// seeded positions, y = beta + N(0, 1).
SyntheticProblem generate_normal_means(long n, long p_star, double A, std::uint64_t seed);

/// Linear regression with i.i.d. N(0, 1) predictors (pairwise correlation rho
/// via a shared factor), the first p_star coefficients equal to `amplitude`
/// with alternating signs, and Gaussian noise of deviation `noise_sd`.
SyntheticProblem generate_linear(long n, long D, long p_star, double amplitude, double noise_sd,
                                 std::uint64_t seed, double rho = 0.0);

/// Logistic regression analogue of generate_linear with targets in {0, 1}.
SyntheticProblem generate_logistic(long n, long D, long p_star, double amplitude,
                                   std::uint64_t seed, double rho = 0.0);

}  // namespace hsprior
