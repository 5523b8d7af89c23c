#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "lppkit/stats.hpp"

using namespace lppkit;

TEST_CASE("moments") {
  CHECK(mean({1, 2, 3, 4}) == 2.5);
  CHECK(variance({1, 2, 3, 4}) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(variance({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(mean({}), std::invalid_argument);
  // Naive left-to-right summation returns 0 here.
  CHECK(compensated_sum({1e16, 1.0, -1e16}) == 1.0);
  CHECK(binomial_stderr(0.25, 300) == doctest::Approx(std::sqrt(0.25 * 0.75 / 300)).epsilon(1e-15));
  CHECK(binomial_stderr(0.0, 100) == 0.0);
}

TEST_CASE("reductions are invariant under permutation") {
  std::mt19937_64 rng(4);
  std::lognormal_distribution<double> d(0.0, 3.0);
  std::vector<double> v(5000);
  for (double& x : v) x = d(rng) * (rng() % 2 ? 1 : -1);
  const double m = mean(v), s2 = variance(v);
  const auto a = std::vector<double>(v.begin(), v.begin() + 2500);
  const auto b = std::vector<double>(v.begin() + 2500, v.end());
  const double ks = two_sample_ks(a, b);
  for (int k = 0; k < 10; ++k) {
    std::shuffle(v.begin(), v.end(), rng);
    CHECK(mean(v) == m);
    CHECK(variance(v) == s2);
    std::vector<double> a2(a), b2(b);
    std::shuffle(a2.begin(), a2.end(), rng);
    std::shuffle(b2.begin(), b2.end(), rng);
    CHECK(two_sample_ks(a2, b2) == ks);
  }
}

TEST_CASE("regression on exact power laws") {
  const std::vector<double> n{100, 200, 400, 800};
  std::vector<double> var;
  for (double x : n) var.push_back(3.0 * std::pow(x, 2.0 / 3.0));
  const LinearFit f = log_log_fit(n, var);
  CHECK(f.slope == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.slope_stderr < 1e-6);
  CHECK_THROWS_AS(linear_regression({1, 1, 1}, {1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(log_log_fit({1, 2}, {1, -1}), std::invalid_argument);
}

TEST_CASE("variance exponent fit recovers a planted exponent") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  const std::vector<double> n{100, 200, 400, 800};
  std::vector<std::vector<double>> samples;
  for (double x : n) {
    std::vector<double> s(4000);
    for (double& v : s) v = 4 * x + std::pow(x, 1.0 / 3.0) * g(rng);
    samples.push_back(s);
  }
  const LinearFit f = variance_exponent_fit(n, samples);
  CHECK(f.slope == doctest::Approx(2.0 / 3.0).epsilon(0.05));
  CHECK_THROWS_AS(variance_exponent_fit({100, 200, 400}, {samples[0], samples[1], samples[2]}),
                  std::invalid_argument);
  std::vector<std::vector<double>> thin = samples;
  thin[2].resize(100);
  CHECK_THROWS_AS(variance_exponent_fit(n, thin), std::invalid_argument);
}

TEST_CASE("two-sample KS") {
  CHECK(two_sample_ks({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(two_sample_ks({1, 2, 3}, {4, 5}) == 1.0);
  CHECK(two_sample_ks({1, 2, 3, 4}, {3, 4, 5, 6}) == 0.5);
  CHECK_THROWS_AS(two_sample_ks({}, {1.0}), std::invalid_argument);
  // Ties across the samples are resolved by stepping both CDFs together.
  CHECK(two_sample_ks({0, 0, 1}, {0, 1, 1}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("one-sample KS and its critical value") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u;
  std::vector<double> s(2000);
  for (double& x : s) x = u(rng);
  const double d = ks_statistic(s, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(d < ks_critical_value(s.size(), 1e-3));
  CHECK(ks_statistic({0.5}, [](double x) { return std::clamp(x, 0.0, 1.0); }) == 0.5);
  CHECK(ks_critical_value(100, 0.05) == doctest::Approx(1.3581 / 10).epsilon(1e-3));
}

TEST_CASE("correlation") {
  CHECK(pearson_correlation({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
  CHECK(pearson_correlation({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
}

TEST_CASE("tail tables") {
  const std::vector<double> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto rows = tail_table(v, 4.5, 1.0, {0, 1, 2, 5});
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].upper == 0.5);
  CHECK(rows[0].lower == 0.5);
  CHECK(rows[1].upper == 0.4);
  CHECK(rows[2].upper == 0.3);
  CHECK(rows[3].upper == 0.0);
  CHECK(rows[0].count == 10);

  std::vector<TailTableRow> planted;
  for (double r = 0; r <= 4.0; r += 0.5) planted.push_back({r, 0.8 * std::exp(-1.7 * r), 0.0, 1000});
  planted.push_back({5.0, 0.0, 0.0, 1000});
  const LinearFit f = log_tail_fit(planted, 1.0, 4.0);
  CHECK(f.slope == doctest::Approx(-1.7).epsilon(1e-12));
  CHECK(log_tail_fit(planted, 1.0, 6.0).slope == doctest::Approx(-1.7).epsilon(1e-12));
}
