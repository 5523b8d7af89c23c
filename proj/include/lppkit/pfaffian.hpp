#pragma once

// Pfaffians of skew-symmetric matrices, and truncated Fredholm Pfaffian series
// of 2x2 matrix kernels on a quadrature grid over (r, infinity).

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace lppkit {

/// Even-dimensional skew-symmetric real matrix. Construction rejects odd sizes
/// and entries with |a_uv + a_vu| above `tol` times the largest entry.
class SkewMatrix {
 public:
  explicit SkewMatrix(Eigen::MatrixXd a, double tol = 1e-12);

  Eigen::Index size() const { return a_.rows(); }
  const Eigen::MatrixXd& matrix() const { return a_; }

 private:
  Eigen::MatrixXd a_;
};

/// Parlett-Reid elimination with partial pivoting, O(n^3). Works on a copy.
double pfaffian(const SkewMatrix& a);
/// The same elimination on an unchecked matrix; complex entries are not conjugated.
double pfaffian(Eigen::MatrixXd a);
std::complex<double> pfaffian(Eigen::MatrixXcd a);

/// Expansion along the first row, (2k-1)!! terms. Reference for small sizes.
double pfaffian_expansion(const Eigen::MatrixXd& a);

struct KernelBlock {
  double k11 = 0.0, k12 = 0.0, k21 = 0.0, k22 = 0.0;
};

/// Bounds |K11| <= C e^{-a(x+y)}, |K12| <= C e^{-ax+by}, |K22| <= C e^{b(x+y)}, a > b >= 0.
struct DecayCertificate {
  double C = 1.0;
  double a = 1.0;
  double b = 0.0;
};

struct MatrixKernel {
  std::function<KernelBlock(double, double)> eval;
  std::optional<DecayCertificate> certificate;
};

/// K11 = C e^{-a(x+y)} tanh(y-x), K22 = C e^{b(x+y)} tanh(y-x),
/// K12(x,y) = C e^{-ax+by}, K21(x,y) = -K12(y,x). Carries the certificate (C, a, b).
MatrixKernel synthetic_kernel(double C, double a, double b);

/// Skew 2k x 2k matrix (K(x_u, x_v))_{u,v}. When scale is given, block rows and
/// columns u, v are multiplied by sqrt(scale[u] scale[v]).
Eigen::MatrixXd assemble_kernel_matrix(const MatrixKernel& k, const std::vector<double>& points,
                                       const std::vector<double>* scale = nullptr);

/// Pf(K(x_i, x_j))_{i,j=1..k}.
double kernel_pfaffian(const MatrixKernel& k, const std::vector<double>& points);

/// (2k)^{k/2} C^k prod e^{-(a-b) x_i} with k = points.size(). Throws without a certificate.
double decay_bound_certificate(const MatrixKernel& k, const std::vector<double>& points);

/// Quadrature over (r, infinity) for the truncated series.
struct FredholmTruncation {
  double r = 0.0;
  int k_max = 8;
  std::vector<double> nodes;
  std::vector<double> weights;

  /// x = r - ln(1 - u), Gauss-Legendre in u on (0, 1).
  static FredholmTruncation exponential(double r, int k_max, int order = 40);
};

/// Gauss-Legendre nodes and weights on (0, 1).
void gauss_legendre_unit(int order, std::vector<double>& nodes, std::vector<double>& weights);

struct FredholmValue {
  double value = 1.0;
  /// Quadrature approximations of (1/k!) int Pf(K(x_i,x_j)), k = 0..k_max.
  std::vector<double> terms;
  std::optional<double> tail_bound;
};

/// 1 + sum_{k=1}^{k_max} (1/k!) int_{(r,inf)^k} Pf(K(x_i,x_j)) dx, the sum over k read
/// off the polynomial z -> Pf(J + z K_N) of the discretized kernel.
FredholmValue fredholm_pfaffian(const MatrixKernel& k, const FredholmTruncation& trunc);

/// sum_{k > k_max} (1/k!) (2k)^{k/2} (C e^{-(a-b) r} / (a-b))^k: the integrated Hadamard
/// bound over every dropped order.
double fredholm_tail_bound(const DecayCertificate& c, double r, int k_max);

/// Smallest C' with fredholm_tail_bound(c, r, 0) <= C' e^{-(a-b) r} for every r >= r0.
double fit_tail_constant(const DecayCertificate& c, double r0);

}  // namespace lppkit
