#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "lppkit/parallel.hpp"
#include "lppkit/stats.hpp"
#include "lppkit/weights.hpp"

using namespace lppkit;

TEST_CASE("philox known-answer vectors") {
  using philox::philox4x32_10;
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) ==
        philox::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        philox::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        philox::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("splitmix64 and seed derivation") {
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafull);
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("uniform map stays in (0, 1]") {
  CHECK(uniform_open_closed(0) == 0x1.0p-53);
  CHECK(uniform_open_closed(~std::uint64_t{0}) == 1.0);
  CHECK(uniform_open_closed(std::uint64_t{1} << 63) == 0.5 + 0x1.0p-53);
}

TEST_CASE("weights are pure functions of seed and site") {
  const CoupledWeightField f(42, 0.5);
  const CoupledWeightField g(42, 0.5);
  for (std::int64_t i = -5; i <= 5; ++i) {
    for (std::int64_t j = -5; j <= 5; ++j) {
      CHECK(f.bulk(i, j) == g.bulk(i, j));
      CHECK(f.bulk(i, j) > 0.0);
    }
    CHECK(f.boundary(i) == g.boundary(i));
    CHECK(f.boundary(i) > 0.0);
  }
  CHECK(CoupledWeightField(43, 0.5).bulk(0, 0) != f.bulk(0, 0));
  // Large coordinates occupy the upper counter words.
  CHECK(f.bulk(std::int64_t{1} << 40, -(std::int64_t{1} << 40)) != f.bulk(0, 0));
}

TEST_CASE("evaluation order and threads never change values") {
  const CoupledWeightField f(7, 1.0);
  std::vector<std::pair<int, int>> sites;
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 30; ++j) sites.emplace_back(i, j);
  std::vector<double> forward(sites.size()), shuffled(sites.size()), threaded(sites.size());
  for (std::size_t k = 0; k < sites.size(); ++k) forward[k] = f.bulk(sites[k].first, sites[k].second);
  std::vector<std::size_t> order(sites.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::shuffle(order.begin(), order.end(), std::mt19937(3));
  for (std::size_t k : order) shuffled[k] = f.bulk(sites[k].first, sites[k].second);
  parallel_for(sites.size(), 4, [&](std::size_t k) { threaded[k] = f.bulk(sites[k].first, sites[k].second); });
  CHECK(forward == shuffled);
  CHECK(forward == threaded);
}

TEST_CASE("coupling shares off-diagonal weights") {
  const CoupledWeightField a(11, 0.5), b(11, 3.0);
  CHECK(a.weight_half({3, 1}) == a.weight_full({3, 1}));
  CHECK(a.weight_half({3, 1}) == b.weight_half({3, 1}));
  CHECK(a.weight_half({2, 2}) == a.boundary(2));
  // U depends on alpha only through the rate.
  CHECK(a.boundary(2) == doctest::Approx(6.0 * b.boundary(2)).epsilon(1e-15));
  CHECK_THROWS_AS(a.weight_half({1, 3}), OutsideHalfPlane);
  CHECK_THROWS_AS(CoupledWeightField(1, 0.0), std::invalid_argument);
}

TEST_CASE("diagonal weight at alpha = 1/2 has mean 2 over 1e6 seeds") {
  std::vector<double> u(1000000);
  for (std::size_t s = 0; s < u.size(); ++s) u[s] = CoupledWeightField(s, 0.5).weight_half({2, 2});
  CHECK(std::abs(mean(u) - 2.0) < 0.02);
}

TEST_CASE("bulk marginal passes KS against Exp(1)") {
  const CoupledWeightField f(2024, 0.5);
  std::vector<double> w;
  for (int i = 0; i < 200; ++i)
    for (int j = 0; j < 100; ++j) w.push_back(f.bulk(i, j));
  const double d = ks_statistic(w, [](double x) { return 1.0 - std::exp(-x); });
  CHECK(d < ks_critical_value(w.size(), 1e-3));
  CHECK(mean(w) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(variance(w) == doctest::Approx(1.0).epsilon(0.06));
}

TEST_CASE("boundary marginal passes KS against Exp(alpha)") {
  const CoupledWeightField f(99, 0.75);
  std::vector<double> u;
  for (int i = -10000; i < 10000; ++i) u.push_back(f.boundary(i));
  const double d = ks_statistic(u, [](double x) { return 1.0 - std::exp(-0.75 * x); });
  CHECK(d < ks_critical_value(u.size(), 1e-3));
}

TEST_CASE("bulk and boundary streams are uncorrelated") {
  const CoupledWeightField f(5, 1.0);
  std::vector<double> w, u;
  for (int i = 0; i < 20000; ++i) {
    w.push_back(f.bulk(i, i));
    u.push_back(f.boundary(i));
  }
  CHECK(std::abs(pearson_correlation(w, u)) < 4.0 / std::sqrt(20000.0));
}

TEST_CASE("weight window reproduces the field") {
  const CoupledWeightField f(13, 0.5);
  const LatticeRect r{-3, -4, 5, 2};
  const WeightWindow w(f, r);
  for (std::int64_t j = r.j0; j <= r.j1; ++j)
    for (std::int64_t i = r.i0; i <= r.i1; ++i) CHECK(w.bulk(i, j) == f.bulk(i, j));
  for (std::int64_t i = -3; i <= 2; ++i) {
    REQUIRE(w.has_boundary(i));
    CHECK(w.boundary(i) == f.boundary(i));
  }
  CHECK_FALSE(w.has_boundary(3));

  WeightWindow c(LatticeRect{0, 0, 2, 2}, 1.0);
  c.set_bulk({1, 0}, 5.0);
  c.set_boundary(1, 9.0);
  CHECK(c.bulk(1, 0) == 5.0);
  CHECK(c.boundary(1) == 9.0);
  c.fill_boundary(0.25);
  CHECK(c.boundary(0) == 0.25);
  CHECK(c.boundary(2) == 0.25);
}
