#include <doctest.h>

#include <cmath>

#include "hsprior/diagnostics.hpp"
#include "hsprior/distributions.hpp"

using namespace hsprior;

namespace {

Eigen::MatrixXd ar1_chains(int n, int chains, double rho, std::uint64_t seed, double offset_last = 0.0) {
  Eigen::MatrixXd m(n, chains);
  for (int c = 0; c < chains; ++c) {
    RngStream rng(seed, static_cast<std::uint64_t>(c));
    double x = rng.standard_normal() / std::sqrt(1.0 - rho * rho);
    for (int i = 0; i < n; ++i) {
      x = rho * x + rng.standard_normal();
      m(i, c) = x + (c == chains - 1 ? offset_last : 0.0);
    }
  }
  return m;
}

}  // namespace

TEST_CASE("autocovariance matches the direct sum") {
  RngStream rng(2, 0);
  Eigen::VectorXd x(37);
  for (auto& v : x) v = rng.standard_normal();
  const Eigen::VectorXd ac = autocovariance(x);
  const double m = x.mean();
  for (int lag : {0, 1, 5, 36}) {
    double s = 0.0;
    for (int i = 0; i + lag < 37; ++i) s += (x(i) - m) * (x(i + lag) - m);
    CHECK(ac(lag) == doctest::Approx(s / 37.0).epsilon(1e-10));
  }
}

TEST_CASE("independent draws give R-hat near 1 and ESS near N") {
  const auto d = convergence(ar1_chains(1000, 4, 0.0, 1));
  CHECK(d.rhat < 1.01);
  CHECK(d.ess_bulk > 3000);
  CHECK(d.ess_bulk < 5000);
  CHECK(d.ess_tail > 2500);
}

TEST_CASE("AR(1) ESS follows N (1 - rho) / (1 + rho)") {
  const double rho = 0.8;
  const Eigen::MatrixXd m = ar1_chains(5000, 4, rho, 3);
  const double expected = 20000.0 * (1.0 - rho) / (1.0 + rho);
  CHECK(ess_basic(m) == doctest::Approx(expected).epsilon(0.2));
  CHECK(convergence(m).ess_bulk == doctest::Approx(expected).epsilon(0.2));
}

TEST_CASE("a shifted chain inflates R-hat") {
  CHECK(convergence(ar1_chains(500, 4, 0.3, 4, 2.0)).rhat > 1.1);
  CHECK(rhat_basic(ar1_chains(500, 4, 0.3, 4, 2.0)) > 1.1);
  Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(100, 2, 1.5);
  CHECK(std::isnan(convergence(constant).rhat));
}
