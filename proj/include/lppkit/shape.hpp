#pragma once

// Shape function, KPZ scaling of lattice endpoints and values, and the
// diagonal deficit of the shape function along the barrier geometry.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "lppkit/lattice.hpp"

namespace lppkit {

/// d(p; q) = (sqrt(q.i - p.i + 1) + sqrt(q.j - p.j + 1))^2. Throws for p not preceding q.
double shape_d(LatticePoint p, LatticePoint q);
long double shape_d_ld(LatticePoint p, LatticePoint q);

/// floor(v) that treats values a few ulps below an integer as that integer,
/// so that e.g. 1000^(2/3) floors to 100.
std::int64_t robust_floor(long double v);

/// n^(2/3 + delta) and friends, evaluated as cbrt(n)^2 * n^delta.
long double n_two_thirds(std::int64_t n);
long double n_pow(std::int64_t n, long double exponent);
std::int64_t floor_cbrt(std::int64_t n);

struct ShapeParams {
  std::int64_t n = 0;
  double delta = 0.0;
  std::int64_t M = 1;
  double ell = 0.5;
  double gamma = 1.0;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
  /// n^(2/3) M < n^(2/3+delta) (1 - ell).
  bool admissible() const;
  /// 8 gamma n^(2/3) < ell n^(2/3+delta).
  bool cylinder_fits() const;

  /// floor(ell n^(2/3+delta)).
  std::int64_t offset() const;
  /// (x1, y1) = (offset - Mn, -Mn).
  LatticePoint barrier_start() const;
  /// (x2, y2) = (offset + Mn, Mn).
  LatticePoint barrier_end() const;
  /// Left endpoint of I = [offset - Mn, Mn].
  std::int64_t interval_lo() const { return offset() - M * n; }
  std::int64_t interval_hi() const { return M * n; }
};

enum class ScalingVariant { HalfShifted, FullShifted, FullUnshifted };

struct ScaledQuery {
  double x = 0.0, s = 0.0, y = 0.0, t = 1.0;
  std::int64_t n = 1;
  double delta = 0.0;
  ScalingVariant variant = ScalingVariant::HalfShifted;
};

struct LatticeEndpoints {
  LatticePoint start;
  LatticePoint end;
};

/// Lattice endpoints of a scaled query. Throws std::invalid_argument unless s < t.
LatticeEndpoints scale_endpoints(const ScaledQuery& q);

/// 2^(-4/3) n^(-1/3) raw - 2^(2/3) n^(2/3) (t - s) - 2^(4/3) n^(1/3) (y - x).
double scale_value(double raw, const ScaledQuery& q);
double unscale_value(double scaled, const ScaledQuery& q);

/// sqrt(A^2 - B^2) <= A - B^2 / (2A) for A > max(0, B); the root is real only for A >= -B.
bool sqrt_inequality_holds(long double A, long double B);

// Deficits relative to 8Mn along the barrier geometry of `p`.

enum class DeficitPart { TwoTerm, ThreeTerm };

/// d(x1,y1; j,j) + d(i,i; x2,y2) - 8Mn on i <= j <= i + n^(1/3), i, j in I.
long double diag_deficit_i(const ShapeParams& p, std::int64_t i, std::int64_t j);

/// d(x1,y1; j,j) + d(i,i; t,t) + d(s,s; x2,y2) - 8Mn on i <= j <= s <= t in I,
/// j <= i + n^(1/3), t <= s + n^(1/3).
long double diag_deficit_ii(const ShapeParams& p, std::int64_t i, std::int64_t j, std::int64_t s,
                            std::int64_t t);

struct DeficitMax {
  DeficitPart part = DeficitPart::TwoTerm;
  long double value = 0.0L;
  /// (i, j) for the two-term deficit, (i, j, s, t) for the three-term one.
  std::array<std::int64_t, 4> argmax{};
  std::int64_t evaluations = 0;
};

struct ScanOptions {
  /// Strata per long coordinate (i and s) and per short offset (j - i and t - s).
  std::int64_t long_strata = 64;
  std::int64_t short_strata = 8;
  /// Number of best coarse points refined by local search.
  std::size_t seeds = 8;
};

/// Exact evaluation on a stratified grid, then local refinement around the best points.
DeficitMax scan_deficit(const ShapeParams& p, DeficitPart part, const ScanOptions& opt = {});

/// Every admissible (i, j); quadratic in |I| and meant for small n.
DeficitMax scan_deficit_i_exhaustive(const ShapeParams& p);

/// Upper bound 8Mn + 4(j-i) - offset^2/(4Mn+2) of the proof, so
/// c_raw = offset^2 / ((4Mn+2) n^(1/3+2delta)), and c_absorbed = c_raw - 4 n^(-2 delta)
/// once the 4 n^(1/3) slack is folded in.
long double deficit_c_raw(const ShapeParams& p);
long double deficit_c_absorbed(const ShapeParams& p);

struct DeficitSweepRow {
  ShapeParams params;
  DeficitPart part = DeficitPart::TwoTerm;
  DeficitMax max;
  long double c_n = 0.0L;  ///< -max / n^(1/3 + 2 delta)
  long double c_raw = 0.0L;
  long double c_absorbed = 0.0L;
};

struct DeficitFit {
  std::vector<DeficitSweepRow> rows;
  /// min over the sweep of c_n.
  long double c_hat = 0.0L;
  /// Smallest sweep n from which the maximum stays negative; empty if none.
  std::optional<std::int64_t> n0_hat;
  /// False when the deficit is nonnegative somewhere at the largest n.
  bool ok = false;
};

/// Scans each n of the sweep (sorted ascending). Needs at least four values.
DeficitFit fit_deficit_constant(const ShapeParams& base, const std::vector<std::int64_t>& n_sweep,
                                DeficitPart part, const ScanOptions& opt = {});

}  // namespace lppkit
