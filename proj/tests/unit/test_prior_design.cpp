#include <doctest.h>

#include <cmath>
#include <numeric>

#include "hsprior/kernels.hpp"
#include "hsprior/prior_design.hpp"
#include "hsprior/shrinkage_math.hpp"
#include "hsprior/stats.hpp"

using namespace hsprior;

TEST_CASE("serial and OpenMP m_eff sampling are bit-identical") {
  const PriorConfig prior =
      make_prior_config(5.0, DesignScale{100, 50, 1.0}, HyperpriorFamily::half_cauchy);
  for (long draws : {1L, 4095L, 4096L, 10001L}) {
    const auto a = sample_meff_prior(prior, draws, 9, Execution::serial);
    const auto b = sample_meff_prior(prior, draws, 9, Execution::parallel);
    CHECK(a.draws == b.draws);
    CHECK(a.tau_draws == b.tau_draws);
  }
  const auto c = sample_meff_prior(prior, 5000, 10, Execution::serial);
  const auto d = sample_meff_prior(prior, 5000, 9, Execution::serial);
  CHECK(c.draws != d.draws);
}

TEST_CASE("fixed tau0 prior has mean m_eff = p0 and the analytic variance") {
  const DesignScale scale{100, 10, 1.0};
  const PriorConfig prior = make_prior_config(5.0, scale, HyperpriorFamily::fixed);
  const long N = 200000;
  const auto s = sample_meff_prior(prior, N, 1);
  const Moments m = meff_moments(prior.tau_prior.scale, scale);
  CHECK(m.mean == doctest::Approx(5.0));
  const double mean = stats::mean(s.draws);
  CHECK(std::abs(mean - 5.0) < 4.0 * std::sqrt(m.variance / N));
  CHECK(stats::variance(s.draws) == doctest::Approx(m.variance).epsilon(0.02));
  for (double t : s.tau_draws) REQUIRE(t == prior.tau_prior.scale);
}

TEST_CASE("coupled prior config stores the sigma-free scale") {
  const DesignScale scale{50, 20, 3.0};
  const PriorConfig coupled = make_prior_config(4.0, scale, HyperpriorFamily::half_normal, std::nullopt, true);
  const PriorConfig plain = make_prior_config(4.0, scale, HyperpriorFamily::half_normal);
  CHECK(coupled.tau_prior.scale * 3.0 == doctest::Approx(plain.tau_prior.scale));
  CHECK(coupled.tau_prior_given_sigma(3.0).scale == doctest::Approx(plain.tau_prior.scale));
  // The m_eff prior is the same either way at the configured sigma.
  const auto a = sample_meff_prior(coupled, 3000, 2, Execution::serial);
  const auto b = sample_meff_prior(plain, 3000, 2, Execution::serial);
  for (std::size_t i = 0; i < a.draws.size(); ++i) REQUIRE(a.draws[i] == doctest::Approx(b.draws[i]));
  CHECK_THROWS_AS(make_prior_config(20.0, scale, HyperpriorFamily::half_normal), std::invalid_argument);
  CHECK(make_prior_config(2.0, scale, HyperpriorFamily::half_t, 4.0).tau_prior.df == 4.0);
}

TEST_CASE("histogram covers [0, D] and counts every draw") {
  const PriorConfig prior = make_prior_config(0.5, DesignScale{10, 1, 1.0}, HyperpriorFamily::half_cauchy);
  const auto s = sample_meff_prior(prior, 10000, 5);
  for (double v : s.draws) {
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
  }
  for (BinScale bs : {BinScale::linear, BinScale::log}) {
    const MeffSummary sum = summarize_meff(s, 1, 20, bs);
    long total = 0;
    for (const auto& b : sum.histogram) total += b.count;
    CHECK(total == 10000);
    CHECK(sum.histogram.front().left == 0.0);
    CHECK(sum.histogram.back().right == 1.0);
    CHECK(sum.histogram.size() == 20);
    for (std::size_t i = 1; i < sum.histogram.size(); ++i)
      CHECK(sum.histogram[i].left == sum.histogram[i - 1].right);
  }
  const MeffSummary sum = summarize_meff(s, 1);
  CHECK(sum.quantiles.size() == 7);
  const auto j = to_json(sum);
  CHECK(j.contains("mean"));
  CHECK(j.contains("var"));
  CHECK(j["quantiles"].contains("50%"));
  CHECK(histogram_csv(sum).rfind("bin_left,bin_right,count\n", 0) == 0);
}

TEST_CASE("kernel task runner propagates exceptions") {
  for (Execution e : {Execution::serial, Execution::parallel}) {
    std::vector<int> out(100, 0);
    kernels::for_each_task(e, 100, [&](long i) { out[static_cast<std::size_t>(i)] = static_cast<int>(i); });
    CHECK(std::accumulate(out.begin(), out.end(), 0) == 4950);
    CHECK_THROWS_AS(kernels::for_each_task(e, 10,
                                           [](long i) {
                                             if (i == 7) throw std::runtime_error("task 7");
                                           }),
                    std::runtime_error);
  }
}
