#include <doctest.h>

#include <cmath>

#include "hsprior/dataset.hpp"
#include "hsprior/distributions.hpp"
#include "hsprior/lasso.hpp"

using namespace hsprior;

namespace {

Dataset orthonormal_pair(const Eigen::Vector4d& y) {
  Dataset d;
  d.X.resize(4, 2);
  d.X << 1, 1, 1, -1, -1, 1, -1, -1;  // X'X = n I, zero column means
  d.y = y;
  return d;
}

double soft(double x, double t) { return x > t ? x - t : (x < -t ? x + t : 0.0); }

}  // namespace

TEST_CASE("orthonormal design gives soft-thresholded least squares") {
  const Eigen::Vector4d y(3.0, 1.0, -0.5, 0.25);
  const Dataset d = orthonormal_pair(y);
  const Eigen::Vector2d ols = d.X.transpose() * y / 4.0;
  for (double pen : {0.01, 0.2, 0.5, 0.9}) {
    const LassoFit f = lasso_path_fit(d, LikelihoodKind::gaussian, pen);
    CHECK(std::abs(f.coefficients(0) - soft(ols(0), pen)) < 1e-10);
    CHECK(std::abs(f.coefficients(1) - soft(ols(1), pen)) < 1e-10);
    CHECK(std::abs(f.intercept - y.mean()) < 1e-10);
  }
}

TEST_CASE("penalty at lambda_max gives the null model") {
  const auto p = generate_linear(40, 8, 2, 1.0, 1.0, 5);
  const Dataset d = standardize(p.data);
  const double lmax = lasso_lambda_max(d);
  const LassoFit f = lasso_path_fit(d, LikelihoodKind::gaussian, lmax);
  CHECK(f.p_lasso == 0);
  CHECK(f.intercept == doctest::Approx(d.y.mean()));
  CHECK(lasso_path_fit(d, LikelihoodKind::gaussian, 0.98 * lmax).p_lasso >= 1);
}

TEST_CASE("solutions are KKT-stationary and beat nearby points") {
  for (auto kind : {LikelihoodKind::gaussian, LikelihoodKind::bernoulli_logit}) {
    const auto p = kind == LikelihoodKind::gaussian ? generate_linear(50, 20, 4, 1.0, 1.0, 8)
                                                    : generate_logistic(50, 20, 4, 1.0, 8);
    const Dataset d = standardize(p.data);
    const double lmax = lasso_lambda_max(d);
    for (double frac : {0.5, 0.1, 0.02}) {
      const LassoFit f = lasso_path_fit(d, kind, frac * lmax);
      CAPTURE(frac);
      CHECK(lasso_kkt_residual(d, kind, f) < 1e-7);
      const double obj = lasso_objective(d, kind, f);
      RngStream rng(1, 0);
      for (int k = 0; k < 50; ++k) {
        LassoFit g = f;
        for (Eigen::Index j = 0; j < g.coefficients.size(); ++j) g.coefficients(j) += 1e-3 * rng.standard_normal();
        g.intercept += 1e-3 * rng.standard_normal();
        REQUIRE(lasso_objective(d, kind, g) >= obj - 1e-12);
      }
    }
  }
}

TEST_CASE("warm starts reach the same solution") {
  const auto p = generate_linear(60, 15, 3, 1.5, 1.0, 9);
  const Dataset d = standardize(p.data);
  const double lmax = lasso_lambda_max(d);
  const LassoFit cold = lasso_path_fit(d, LikelihoodKind::gaussian, 0.05 * lmax);
  const LassoFit start = lasso_path_fit(d, LikelihoodKind::gaussian, 0.3 * lmax);
  const LassoFit warm = lasso_path_fit(d, LikelihoodKind::gaussian, 0.05 * lmax, &start);
  CHECK((cold.coefficients - warm.coefficients).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("cross-validation is deterministic and keeps the true support") {
  const auto p = generate_linear(100, 30, 5, 2.0, 1.0, 10);
  const Dataset d = standardize(p.data);
  const auto a = lasso_cv(d, LikelihoodKind::gaussian, 10, 50, 3);
  const auto b = lasso_cv(d, LikelihoodKind::gaussian, 10, 50, 3);
  CHECK(a.fold_of_row == b.fold_of_row);
  CHECK(a.selected == b.selected);
  CHECK(a.fit.coefficients == b.fit.coefficients);
  for (double v : a.cv_deviance) CHECK(std::isfinite(v));
  for (int j = 0; j < 5; ++j) CHECK(a.fit.coefficients(j) != 0.0);
  REQUIRE(a.fit.noise_variance);
  CHECK(*a.fit.noise_variance == doctest::Approx(1.0).epsilon(0.5));
  const auto c = lasso_cv(d, LikelihoodKind::gaussian, 10, 50, 4);
  CHECK(c.fold_of_row != a.fold_of_row);
}

TEST_CASE("logistic folds are stratified by class") {
  const auto p = generate_logistic(60, 10, 2, 1.0, 12);
  const Dataset d = standardize(p.data);
  const auto cv = lasso_cv(d, LikelihoodKind::bernoulli_logit, 5, 20, 1);
  const double ones = d.y.sum();
  for (int f = 0; f < 5; ++f) {
    double fold_ones = 0.0, fold_n = 0.0;
    for (Eigen::Index i = 0; i < d.n(); ++i)
      if (cv.fold_of_row[static_cast<std::size_t>(i)] == f) {
        fold_n += 1.0;
        fold_ones += d.y(i);
      }
    CHECK(std::abs(fold_ones - ones / 5.0) <= 1.0);
    CHECK(fold_n == doctest::Approx(12.0).epsilon(0.1));
  }
  CHECK_FALSE(cv.fit.noise_variance.has_value());
  CHECK(std::isfinite(lasso_mlpd(cv.fit, LikelihoodKind::bernoulli_logit, d.X, d.y)));
}

TEST_CASE("wide problems keep at most n - 1 active coefficients") {
  const auto p = generate_linear(10, 30, 3, 2.0, 1.0, 11);
  const Dataset d = standardize(p.data);
  const LassoFit f = lasso_path_fit(d, LikelihoodKind::gaussian, 1e-3 * lasso_lambda_max(d));
  CHECK(f.p_lasso <= 9);
  CHECK(f.noise_variance.has_value() != f.degenerate_variance);
  const auto j = to_json(f);
  CHECK(j.contains("p_lasso"));
  CHECK(j.contains("noise_variance"));
  CHECK_THROWS_AS(lasso_cv(d, LikelihoodKind::gaussian, 20), std::invalid_argument);
}
