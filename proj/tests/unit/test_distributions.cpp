#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "hsprior/distributions.hpp"
#include "hsprior/stats.hpp"

using namespace hsprior;

namespace {

std::vector<HyperpriorSpec> proper_specs() {
  return {HyperpriorSpec::half_normal(0.7), HyperpriorSpec::half_cauchy(2.0),
          HyperpriorSpec::half_t(0.3, 3.0), HyperpriorSpec::half_t(1.5, 7.5)};
}

}  // namespace

TEST_CASE("RngStream is reproducible and streams are distinct") {
  RngStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  std::vector<std::uint64_t> va, vb, vc, vd;
  for (int i = 0; i < 100; ++i) {
    va.push_back(a());
    vb.push_back(b());
    vc.push_back(c());
    vd.push_back(d());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
  RngStream e(1, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = e.uniform_open();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("hyperprior densities integrate to one") {
  boost::math::quadrature::exp_sinh<double> es;
  for (const auto& spec : proper_specs()) {
    auto f = [&](double x) { return x > 0.0 ? std::exp(log_density(spec, x)) : 0.0; };
    CAPTURE(spec.label());
    CHECK(es.integrate(f) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("CDF agrees with quadrature of the density and inverts the quantile") {
  boost::math::quadrature::tanh_sinh<double> ts;
  for (const auto& spec : proper_specs()) {
    CAPTURE(spec.label());
    for (double x : {0.05, 0.4, 1.0, 3.0}) {
      auto f = [&](double t) { return t > 0.0 ? std::exp(log_density(spec, t)) : 0.0; };
      CHECK(cdf(spec, x) == doctest::Approx(ts.integrate(f, 0.0, x)).epsilon(1e-9));
    }
    for (double p : {0.01, 0.25, 0.5, 0.9, 0.999})
      CHECK(cdf(spec, quantile(spec, p)) == doctest::Approx(p).epsilon(1e-10));
  }
  CHECK(quantile(HyperpriorSpec::half_cauchy(2.0), 0.5) == doctest::Approx(2.0));
  CHECK(quantile(HyperpriorSpec::half_cauchy(1.0), 0.9) ==
        doctest::Approx(std::tan(0.45 * std::numbers::pi)));
  CHECK(median(HyperpriorSpec::half_normal(1.0)) == doctest::Approx(0.6744897501960817));
}

TEST_CASE("log density derivative matches central differences") {
  for (const auto& spec : proper_specs()) {
    CAPTURE(spec.label());
    for (double x : {0.02, 0.5, 1.3, 8.0}) {
      const double h = 1e-6 * x;
      const double fd = (log_density(spec, x + h) - log_density(spec, x - h)) / (2.0 * h);
      const auto d = log_density_with_derivative(spec, x);
      CHECK(d.value == doctest::Approx(log_density(spec, x)));
      CHECK(d.d_dx == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("samplers reproduce their CDFs (KS, level 0.001)") {
  for (const auto& spec : proper_specs()) {
    CAPTURE(spec.label());
    RngStream rng(7, 1);
    std::vector<double> xs(20000);
    for (auto& x : xs) x = sample(spec, rng);
    const double d = stats::ks_statistic(xs, [&](double x) { return cdf(spec, x); });
    CHECK(d < stats::ks_critical(0.001, static_cast<double>(xs.size())));
  }
  RngStream rng(1, 0);
  CHECK(sample(HyperpriorSpec::fixed(0.25), rng) == 0.25);
}

TEST_CASE("invalid hyperprior use is rejected") {
  CHECK_THROWS_AS(log_density(HyperpriorSpec::half_cauchy(1.0), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(log_density(HyperpriorSpec::half_cauchy(1.0), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(log_density(HyperpriorSpec::fixed(1.0), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(HyperpriorSpec::half_normal(0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(HyperpriorSpec::half_t(1.0, -2.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse_family("laplace"), std::invalid_argument);
  CHECK(parse_family("half-t") == HyperpriorFamily::half_t);
  CHECK(HyperpriorSpec::half_normal(2.0).rescaled(3.0).scale == doctest::Approx(6.0));
  CHECK(log_density_sigma2_reference(2.0) == doctest::Approx(-std::log(2.0)));
}
