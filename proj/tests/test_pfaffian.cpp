#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "lppkit/pfaffian.hpp"

using namespace lppkit;

namespace {

Eigen::MatrixXd random_skew(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index u = 0; u < n; ++u) {
    for (Eigen::Index v = u + 1; v < n; ++v) {
      a(u, v) = g(rng);
      a(v, u) = -a(u, v);
    }
  }
  return a;
}

double series_tail(const DecayCertificate& c, double r, int k_max) {
  const double q = c.C * std::exp(-(c.a - c.b) * r) / (c.a - c.b);
  double s = 0.0;
  for (int k = k_max + 1; k <= 200; ++k) {
    s += std::exp(-std::lgamma(k + 1.0) + 0.5 * k * std::log(2.0 * k) + k * std::log(q));
  }
  return s;
}

}  // namespace

TEST_CASE("small Pfaffians") {
  Eigen::MatrixXd a(2, 2);
  a << 0, 3.5, -3.5, 0;
  CHECK(pfaffian(SkewMatrix(a)) == 3.5);
  Eigen::MatrixXd b(4, 4);
  b << 0, 2, 3, 5, -2, 0, 7, 11, -3, -7, 0, 13, -5, -11, -13, 0;
  CHECK(pfaffian(SkewMatrix(b)) == 2.0 * 13 - 3.0 * 11 + 5.0 * 7);
  CHECK(pfaffian_expansion(b) == 28.0);
  CHECK(pfaffian(SkewMatrix(Eigen::MatrixXd::Zero(0, 0))) == 1.0);
  CHECK_THROWS_AS(SkewMatrix(Eigen::MatrixXd::Zero(3, 3)), std::invalid_argument);
  Eigen::MatrixXd c = b;
  c(0, 1) = 2.5;
  CHECK_THROWS_AS(SkewMatrix{c}, std::invalid_argument);
}

TEST_CASE("Pf^2 = det on random skew matrices") {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index n = 2 * (1 + trial % 10);
    const Eigen::MatrixXd a = random_skew(rng, n);
    const double pf = pfaffian(SkewMatrix(a));
    const double det = a.partialPivLu().determinant();
    worst = std::max(worst, std::abs(pf * pf - det) / std::max(std::abs(det), 1e-300));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("elimination matches the first-row expansion") {
  std::mt19937_64 rng(7);
  for (Eigen::Index n : {2, 4, 6, 8, 10}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::MatrixXd a = random_skew(rng, n);
      const double e = pfaffian_expansion(a);
      CHECK(pfaffian(SkewMatrix(a)) == doctest::Approx(e).epsilon(1e-11));
    }
  }
}

TEST_CASE("congruence transforms by det B") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (Eigen::Index n : {4, 8, 12}) {
    const Eigen::MatrixXd a = random_skew(rng, n);
    Eigen::MatrixXd b(n, n);
    for (Eigen::Index u = 0; u < n; ++u) {
      for (Eigen::Index v = 0; v < n; ++v) b(u, v) = g(rng);
    }
    Eigen::MatrixXd t = b.transpose() * a * b;
    t = 0.5 * (t - t.transpose()).eval();
    CHECK(pfaffian(SkewMatrix(t)) ==
          doctest::Approx(b.determinant() * pfaffian(SkewMatrix(a))).epsilon(1e-10));
  }
}

TEST_CASE("complex Pfaffian squares to the determinant") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const Eigen::Index n = 8;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index u = 0; u < n; ++u) {
    for (Eigen::Index v = u + 1; v < n; ++v) {
      a(u, v) = {g(rng), g(rng)};
      a(v, u) = -a(u, v);
    }
  }
  const std::complex<double> pf = pfaffian(a);
  const std::complex<double> det = a.partialPivLu().determinant();
  CHECK(std::abs(pf * pf - det) < 1e-10 * std::abs(det));
}

TEST_CASE("zero kernel gives one") {
  MatrixKernel zero{[](double, double) { return KernelBlock{}; }, std::nullopt};
  const FredholmValue v = fredholm_pfaffian(zero, FredholmTruncation::exponential(0.0, 6, 20));
  CHECK(v.value == 1.0);
  CHECK_FALSE(v.tail_bound);
  for (std::size_t k = 1; k < v.terms.size(); ++k) CHECK(v.terms[k] == 0.0);
}

TEST_CASE("two-node quadrature expands exactly") {
  const MatrixKernel k = synthetic_kernel(0.7, 2.0, 0.5);
  FredholmTruncation t;
  t.r = 0.0;
  t.k_max = 6;
  t.nodes = {0.3, 1.1};
  t.weights = {0.4, 0.9};
  const auto pf2 = [&](double x) {
    const KernelBlock b = k.eval(x, x);
    return b.k12;
  };
  const double one = t.weights[0] * pf2(t.nodes[0]) + t.weights[1] * pf2(t.nodes[1]);
  const double two = t.weights[0] * t.weights[1] * pfaffian_expansion(assemble_kernel_matrix(k, t.nodes));
  const FredholmValue v = fredholm_pfaffian(k, t);
  REQUIRE(v.terms.size() == 7);
  CHECK(v.terms[1] == doctest::Approx(one).epsilon(1e-13));
  CHECK(v.terms[2] == doctest::Approx(two).epsilon(1e-12));
  CHECK(std::abs(v.terms[3]) < 1e-15);
  CHECK(v.value == doctest::Approx(1.0 + one + two).epsilon(1e-13));
}

TEST_CASE("first order term integrates the diagonal Pfaffian") {
  const DecayCertificate c{0.5, 2.0, 1.0};
  const MatrixKernel k = synthetic_kernel(c.C, c.a, c.b);
  for (double x : {0.0, 0.7, 3.0}) {
    CHECK(kernel_pfaffian(k, {x}) == doctest::Approx(c.C * std::exp(-(c.a - c.b) * x)).epsilon(1e-14));
    CHECK(decay_bound_certificate(k, {x}) ==
          doctest::Approx(std::sqrt(2.0) * c.C * std::exp(-(c.a - c.b) * x)).epsilon(1e-14));
  }
  for (double r : {0.0, 1.0, 2.5}) {
    const FredholmValue v = fredholm_pfaffian(k, FredholmTruncation::exponential(r, 1, 40));
    CHECK(v.terms[1] == doctest::Approx(c.C * std::exp(-(c.a - c.b) * r) / (c.a - c.b)).epsilon(1e-10));
  }
}

TEST_CASE("kernel Pfaffians are dominated by the certificate") {
  const MatrixKernel k = synthetic_kernel(0.5, 2.0, 1.0);
  std::mt19937_64 rng(11);
  std::exponential_distribution<double> e(0.7);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> pts(static_cast<std::size_t>(1 + trial % 5));
    for (double& x : pts) x = e(rng);
    CHECK(std::abs(kernel_pfaffian(k, pts)) <= decay_bound_certificate(k, pts) * (1 + 1e-12));
  }
  MatrixKernel bare{k.eval, std::nullopt};
  CHECK_THROWS(decay_bound_certificate(bare, {1.0}));
}

TEST_CASE("truncation orders agree within the tail bound") {
  const MatrixKernel k = synthetic_kernel(0.5, 2.0, 1.0);
  for (double r : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    const FredholmValue v6 = fredholm_pfaffian(k, FredholmTruncation::exponential(r, 6, 40));
    const FredholmValue v8 = fredholm_pfaffian(k, FredholmTruncation::exponential(r, 8, 40));
    REQUIRE(v6.tail_bound);
    CHECK(std::abs(v6.value - v8.value) <= *v6.tail_bound);
    CHECK(*v8.tail_bound <= *v6.tail_bound);
  }
}

TEST_CASE("tail series bound") {
  const DecayCertificate c{0.5, 2.0, 1.0};
  for (double r : {0.0, 1.0, 3.0}) {
    for (int k : {0, 2, 6}) {
      CHECK(fredholm_tail_bound(c, r, k) == doctest::Approx(series_tail(c, r, k)).epsilon(1e-12));
    }
  }
  const double r0 = 1.0;
  const double cp = fit_tail_constant(c, r0);
  for (double r = r0; r <= 10.0; r += 0.25) {
    CHECK(fredholm_tail_bound(c, r, 0) <= cp * std::exp(-(c.a - c.b) * r) * (1 + 1e-12));
  }
  CHECK_THROWS_AS(fredholm_tail_bound(DecayCertificate{1.0, 1.0, 1.0}, 0.0, 2), std::invalid_argument);
}

TEST_CASE("Gauss-Legendre is exact through degree 2n - 1") {
  std::vector<double> u, w;
  gauss_legendre_unit(10, u, w);
  for (int d = 0; d < 20; ++d) {
    double s = 0.0;
    for (std::size_t q = 0; q < u.size(); ++q) s += w[q] * std::pow(u[q], d);
    CHECK(s == doctest::Approx(1.0 / (d + 1)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(gauss_legendre_unit(0, u, w), std::invalid_argument);
}
