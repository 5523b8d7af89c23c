#include "lppkit/pfaffian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lppkit {

SkewMatrix::SkewMatrix(Eigen::MatrixXd a, double tol) : a_(std::move(a)) {
  if (a_.rows() != a_.cols()) throw std::invalid_argument("Pfaffian needs a square matrix");
  if (a_.rows() % 2 != 0) throw std::invalid_argument("Pfaffian needs an even dimension");
  const double scale = a_.size() > 0 ? a_.cwiseAbs().maxCoeff() : 0.0;
  const double limit = tol * scale;
  for (Eigen::Index u = 0; u < a_.rows(); ++u) {
    if (std::abs(a_(u, u)) > limit) throw std::invalid_argument("skew matrix has a nonzero diagonal");
    for (Eigen::Index v = u + 1; v < a_.cols(); ++v) {
      if (!(std::abs(a_(u, v) + a_(v, u)) <= limit)) {
        throw std::invalid_argument("matrix is not skew-symmetric at (" + std::to_string(u) + "," +
                                    std::to_string(v) + ")");
      }
    }
  }
  a_ = 0.5 * (a_ - a_.transpose()).eval();
}

namespace {

template <class Scalar>
Scalar parlett_reid(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a) {
  using std::abs;
  const Eigen::Index n = a.rows();
  if (n != a.cols()) throw std::invalid_argument("Pfaffian needs a square matrix");
  if (n % 2 != 0) throw std::invalid_argument("Pfaffian needs an even dimension");
  if (n == 0) return Scalar(1);
  if (n == 2) return a(0, 1);
  if (n == 4) return a(0, 1) * a(2, 3) - a(0, 2) * a(1, 3) + a(0, 3) * a(1, 2);
  Scalar pf(1);
  for (Eigen::Index k = 0; k + 1 < n; k += 2) {
    Eigen::Index piv = k + 1;
    double best = abs(a(k + 1, k));
    for (Eigen::Index i = k + 2; i < n; ++i) {
      if (abs(a(i, k)) > best) {
        best = abs(a(i, k));
        piv = i;
      }
    }
    if (piv != k + 1) {
      a.row(k + 1).swap(a.row(piv));
      a.col(k + 1).swap(a.col(piv));
      pf = -pf;
    }
    if (a(k + 1, k) == Scalar(0)) return Scalar(0);
    pf *= a(k, k + 1);
    if (k + 2 < n) {
      const Eigen::Index m = n - k - 2;
      const auto tau = (a.row(k).tail(m) / a(k, k + 1)).eval();
      const auto col = a.col(k + 1).tail(m).eval();
      a.bottomRightCorner(m, m) += tau.transpose() * col.transpose() - col * tau;
    }
  }
  return pf;
}

}  // namespace

double pfaffian(const SkewMatrix& a) { return parlett_reid<double>(a.matrix()); }
double pfaffian(Eigen::MatrixXd a) { return parlett_reid<double>(std::move(a)); }
std::complex<double> pfaffian(Eigen::MatrixXcd a) {
  return parlett_reid<std::complex<double>>(std::move(a));
}

namespace {

double expand(const Eigen::MatrixXd& a, std::vector<Eigen::Index>& idx) {
  if (idx.empty()) return 1.0;
  const Eigen::Index first = idx.front();
  double total = 0.0;
  for (std::size_t p = 1; p < idx.size(); ++p) {
    const Eigen::Index partner = idx[p];
    if (a(first, partner) == 0.0) continue;
    std::vector<Eigen::Index> rest;
    rest.reserve(idx.size() - 2);
    for (std::size_t q = 1; q < idx.size(); ++q) {
      if (q != p) rest.push_back(idx[q]);
    }
    const double sign = (p % 2 == 1) ? 1.0 : -1.0;
    total += sign * a(first, partner) * expand(a, rest);
  }
  return total;
}

}  // namespace

double pfaffian_expansion(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() % 2 != 0) {
    throw std::invalid_argument("Pfaffian needs a square matrix of even dimension");
  }
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index u = 0; u < a.rows(); ++u) idx[static_cast<std::size_t>(u)] = u;
  return expand(a, idx);
}

MatrixKernel synthetic_kernel(double C, double a, double b) {
  if (!(C > 0.0) || !(a > b) || !(b >= 0.0)) {
    throw std::invalid_argument("synthetic kernel needs C > 0 and a > b >= 0");
  }
  MatrixKernel k;
  k.eval = [C, a, b](double x, double y) {
    const double sk = std::tanh(y - x);
    return KernelBlock{C * std::exp(-a * (x + y)) * sk, C * std::exp(-a * x + b * y),
                       -C * std::exp(-a * y + b * x), C * std::exp(b * (x + y)) * sk};
  };
  k.certificate = DecayCertificate{C, a, b};
  return k;
}

Eigen::MatrixXd assemble_kernel_matrix(const MatrixKernel& k, const std::vector<double>& points,
                                       const std::vector<double>* scale) {
  if (!k.eval) throw std::invalid_argument("kernel has no evaluator");
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd m(2 * n, 2 * n);
  // Conjugating the two components by e^{+-(a+b)x/2} keeps every entry of a
  // certified kernel at most C e^{-(a-b)(x+y)/2} and leaves the Pfaffian unchanged.
  const double c = k.certificate ? 0.5 * (k.certificate->a + k.certificate->b) : 0.0;
  for (Eigen::Index u = 0; u < n; ++u) {
    for (Eigen::Index v = 0; v < n; ++v) {
      const double x = points[static_cast<std::size_t>(u)];
      const double y = points[static_cast<std::size_t>(v)];
      const KernelBlock b = k.eval(x, y);
      const double w =
          scale ? std::sqrt((*scale)[static_cast<std::size_t>(u)] * (*scale)[static_cast<std::size_t>(v)])
                : 1.0;
      m(2 * u, 2 * v) = w * b.k11 * std::exp(c * (x + y));
      m(2 * u, 2 * v + 1) = w * b.k12 * std::exp(c * (x - y));
      m(2 * u + 1, 2 * v) = w * b.k21 * std::exp(c * (y - x));
      m(2 * u + 1, 2 * v + 1) = w * b.k22 * std::exp(-c * (x + y));
    }
  }
  if (!m.allFinite()) throw std::domain_error("kernel evaluation produced a non-finite entry");
  return m;
}

double kernel_pfaffian(const MatrixKernel& k, const std::vector<double>& points) {
  return pfaffian(assemble_kernel_matrix(k, points));
}

double decay_bound_certificate(const MatrixKernel& k, const std::vector<double>& points) {
  if (!k.certificate) throw std::invalid_argument("kernel carries no decay certificate");
  const DecayCertificate& c = *k.certificate;
  const double kk = static_cast<double>(points.size());
  double log_bound = 0.5 * kk * std::log(2.0 * kk) + kk * std::log(c.C);
  for (double x : points) log_bound -= (c.a - c.b) * x;
  return std::exp(log_bound);
}

void gauss_legendre_unit(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  if (order < 1) throw std::invalid_argument("quadrature order must be positive");
  nodes.assign(static_cast<std::size_t>(order), 0.0);
  weights.assign(static_cast<std::size_t>(order), 0.0);
  for (int i = 0; i < order; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Legendre root x on (-1, 1) mapped to u = (1 - x)/2 so nodes increase.
    nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
    weights[static_cast<std::size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

FredholmTruncation FredholmTruncation::exponential(double r, int k_max, int order) {
  if (k_max < 0) throw std::invalid_argument("series order must be nonnegative");
  FredholmTruncation t;
  t.r = r;
  t.k_max = k_max;
  std::vector<double> u, w;
  gauss_legendre_unit(order, u, w);
  for (std::size_t q = 0; q < u.size(); ++q) {
    t.nodes.push_back(r - std::log1p(-u[q]));
    t.weights.push_back(w[q] / (1.0 - u[q]));
  }
  return t;
}

FredholmValue fredholm_pfaffian(const MatrixKernel& k, const FredholmTruncation& trunc) {
  if (trunc.nodes.size() != trunc.weights.size()) {
    throw std::invalid_argument("quadrature nodes and weights differ in length");
  }
  for (double w : trunc.weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::domain_error("quadrature weight not positive");
  }
  const auto n = static_cast<Eigen::Index>(trunc.nodes.size());
  const Eigen::MatrixXd kn = assemble_kernel_matrix(k, trunc.nodes, &trunc.weights);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index u = 0; u < n; ++u) {
    j(2 * u, 2 * u + 1) = 1.0;
    j(2 * u + 1, 2 * u) = -1.0;
  }

  FredholmValue out;
  if (kn.isZero(0.0)) {
    out.terms.assign(static_cast<std::size_t>(trunc.k_max) + 1, 0.0);
    out.terms[0] = 1.0;
    if (k.certificate) out.tail_bound = fredholm_tail_bound(*k.certificate, trunc.r, trunc.k_max);
    return out;
  }

  // P(z) = Pf(J + z K_N) has degree n; its coefficients are the series terms.
  const Eigen::Index samples = n + 1;
  std::vector<std::complex<double>> p(static_cast<std::size_t>(samples));
  for (Eigen::Index m = 0; m < samples; ++m) {
    const std::complex<double> z = std::polar(1.0, 2.0 * std::numbers::pi * m / samples);
    p[static_cast<std::size_t>(m)] = pfaffian(Eigen::MatrixXcd(j.cast<std::complex<double>>() + z * kn));
  }
  out.value = 0.0;
  const int top = std::min<int>(trunc.k_max, static_cast<int>(n));
  for (int kk = 0; kk <= top; ++kk) {
    std::complex<double> c = 0.0;
    for (Eigen::Index m = 0; m < samples; ++m) {
      c += p[static_cast<std::size_t>(m)] *
           std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(m * kk) / samples);
    }
    const double term = kk == 0 ? 1.0 : c.real() / static_cast<double>(samples);
    if (!std::isfinite(term)) throw std::overflow_error("Fredholm series term overflowed");
    out.terms.push_back(term);
    out.value += term;
  }
  for (int kk = top + 1; kk <= trunc.k_max; ++kk) out.terms.push_back(0.0);
  if (k.certificate) out.tail_bound = fredholm_tail_bound(*k.certificate, trunc.r, trunc.k_max);
  return out;
}

double fredholm_tail_bound(const DecayCertificate& c, double r, int k_max) {
  if (!(c.a > c.b) || !(c.b >= 0.0) || !(c.C > 0.0)) {
    throw std::invalid_argument("decay certificate needs C > 0 and a > b >= 0");
  }
  const double gap = c.a - c.b;
  const double log_q = std::log(c.C / gap) - gap * r;
  double sum = 0.0;
  bool past_peak = false;
  double prev = -INFINITY;
  for (int k = std::max(1, k_max + 1); k < 100000; ++k) {
    const double kk = k;
    const double log_t = -std::lgamma(kk + 1.0) + 0.5 * kk * std::log(2.0 * kk) + kk * log_q;
    if (log_t > 700.0) throw std::overflow_error("tail series term overflowed");
    const double t = std::exp(log_t);
    sum += t;
    if (log_t < prev) past_peak = true;
    prev = log_t;
    if (past_peak && (t <= 1e-18 * sum || t == 0.0)) break;
  }
  return sum;
}

double fit_tail_constant(const DecayCertificate& c, double r0) {
  // Each term carries e^{-k(a-b)r}, so tail * e^{(a-b)r} is nonincreasing in r.
  return fredholm_tail_bound(c, r0, 0) * std::exp((c.a - c.b) * r0);
}

}  // namespace lppkit
