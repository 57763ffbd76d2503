#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "hsprior/distributions.hpp"
#include "hsprior/shrinkage_math.hpp"

using namespace hsprior;
using mp = boost::multiprecision::cpp_bin_float_50;

namespace {

// P(kappa <= k) = (2/pi) atan(u sqrt(k / (1 - k))), from lambda ~ C+(0, 1).
mp kappa_cdf_oracle(mp k, mp u) {
  using boost::multiprecision::atan;
  using boost::multiprecision::sqrt;
  return 2 / boost::math::constants::pi<mp>() * atan(u * sqrt(k / (1 - k)));
}

double integrate_density(double u, int power) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const DesignScale scale{1, 1, 1.0};
  auto f = [&](double k) {
    if (!(k > 0.0 && k < 1.0)) return 0.0;
    return std::pow(k, power) * kappa_prior_density(k, u, scale);
  };
  return ts.integrate(f, 0.0, 1.0);
}

}  // namespace

TEST_CASE("kappa density integrates to one and matches Beta(1/2, 1/2) at u = 1") {
  // Double precision cannot resolve kappa within 1e-16 of 1, which holds mass ~ 1e-8 / u.
  for (double u : {0.1, 1.0, 10.0}) CHECK(std::abs(integrate_density(u, 0) - 1.0) < 1e-6);
  const DesignScale scale{1, 1, 1.0};
  for (double k : {1e-6, 0.01, 0.3, 0.5, 0.77, 0.999999}) {
    const double beta = 1.0 / (std::numbers::pi * std::sqrt(k * (1.0 - k)));
    CHECK(std::abs(kappa_prior_density(k, 1.0, scale) / beta - 1.0) < 1e-13);
  }
}

TEST_CASE("kappa prior mass agrees with the arbitrary-precision CDF") {
  const DesignScale scale{4, 1, 2.0};  // u = tau
  for (double tau : {0.01, 0.3, 1.0, 3.0, 50.0}) {
    for (auto [a, b] : std::vector<std::pair<double, double>>{{0.0, 1.0}, {0.1, 0.2}, {0.0, 0.05}, {0.9, 1.0}}) {
      const mp fa = a == 0.0 ? mp(0) : kappa_cdf_oracle(mp(a), mp(tau));
      const mp fb = b == 1.0 ? mp(1) : kappa_cdf_oracle(mp(b), mp(tau));
      const double expected = static_cast<double>(fb - fa);
      CHECK(kappa_prior_mass(a, b, tau, scale) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("kappa moments match quadrature of the density") {
  for (double u : {0.05, 0.5, 1.0, 4.0, 20.0}) {
    const Moments m = kappa_moments(u, DesignScale{1, 1, 1.0});
    const double e1 = integrate_density(u, 1), e2 = integrate_density(u, 2);
    CHECK(std::abs(m.mean - e1) < 1e-6);
    CHECK(std::abs(m.variance - (e2 - e1 * e1)) < 1e-6);
  }
}

TEST_CASE("kappa moments match Monte Carlo over lambda ~ C+(0, 1)") {
  const DesignScale scale{100, 1, 1.0};
  const double tau = 0.05;  // u = 0.5
  RngStream rng(11, 0);
  const auto lam = HyperpriorSpec::half_cauchy(1.0);
  const int N = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < N; ++i) {
    const double k = shrinkage_factor(sample(lam, rng), tau, scale);
    s1 += k;
    s2 += k * k;
  }
  const double mean = s1 / N, var = s2 / N - mean * mean;
  const Moments m = kappa_moments(tau, scale);
  CHECK(std::abs(mean - m.mean) < 4.0 * std::sqrt(m.variance / N));
  CHECK(var == doctest::Approx(m.variance).epsilon(0.02));
}

TEST_CASE("m_eff moments scale kappa moments by D") {
  const DesignScale scale{200, 1000, 1.0};
  const double tau = 3e-4;
  const Moments k = kappa_moments(tau, scale);
  const Moments m = meff_moments(tau, scale);
  CHECK(m.mean == doctest::Approx((1.0 - k.mean) * 1000.0).epsilon(1e-12));
  CHECK(m.variance == doctest::Approx(k.variance * 1000.0).epsilon(1e-12));
  CHECK(meff_moments(0.0, scale).mean == 0.0);
  CHECK(kappa_moments(0.0, scale).mean == 1.0);
}

TEST_CASE("tau reference values") {
  // tau0 = 5/995 / sqrt(200)
  const double tau0 = tau_reference(5.0, DesignScale{200, 1000, 1.0});
  CHECK(tau0 == doctest::Approx(5.0 / 995.0 / std::sqrt(200.0)).epsilon(1e-15));
  CHECK(std::abs(tau0 - 3.6e-4) < 0.05e-4);
  // the reference tau gives prior mean m_eff = p0
  CHECK(meff_moments(tau0, DesignScale{200, 1000, 1.0}).mean == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(tau_reference(5.0, DesignScale{200, 1000, 3.0}) == doctest::Approx(3.0 * tau0));
  CHECK(tau_reference_identity(100.0, 10000, 1.0) == doctest::Approx(100.0 / 9900.0));
  CHECK(tau_oracle_vanderpas(100, 10000) == doctest::Approx(0.01));
  CHECK_THROWS_AS(tau_reference(0.0, DesignScale{10, 10, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(tau_reference(10.0, DesignScale{10, 10, 1.0}), std::invalid_argument);
}

TEST_CASE("shrinkage profile sums 1 - kappa") {
  const DesignScale scale{16, 3, 2.0};  // u = 2 tau
  const std::vector<double> lambda{0.5, 1.0, 4.0};
  const auto p = shrinkage_profile(lambda, 0.5, scale);
  REQUIRE(p.kappa.size() == 3);
  CHECK(p.kappa[0] == doctest::Approx(1.0 / 1.25));
  CHECK(p.kappa[1] == doctest::Approx(0.5));
  CHECK(p.kappa[2] == doctest::Approx(1.0 / 17.0));
  CHECK(p.m_eff == doctest::Approx(3.0 - 0.8 - 0.5 - 1.0 / 17.0));
}

TEST_CASE("invalid shrinkage inputs are rejected") {
  const DesignScale scale{1, 1, 1.0};
  CHECK_THROWS_AS(kappa_prior_density(0.0, 1.0, scale), std::invalid_argument);
  CHECK_THROWS_AS(kappa_prior_density(1.0, 1.0, scale), std::invalid_argument);
  CHECK_THROWS_AS(kappa_prior_density(0.5, 0.0, scale), std::invalid_argument);
  CHECK_THROWS_AS(shrinkage_factor(-1.0, 1.0, scale), std::invalid_argument);
  CHECK_THROWS_AS(DesignScale({0, 1, 1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(DesignScale({1, 1, -1.0}).validate(), std::invalid_argument);
}
