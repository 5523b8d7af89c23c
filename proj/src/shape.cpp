#include "lppkit/shape.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "lppkit/summation.hpp"

namespace lppkit {

namespace {

void require_ordered(LatticePoint p, LatticePoint q) {
  if (!precedes(p, q)) {
    throw std::invalid_argument("shape function needs " + to_string(p) + " to precede " +
                                to_string(q));
  }
}

/// (sqrt a + sqrt b)^2 = 2(a + b) - (a - b)^2 / (sqrt a + sqrt b)^2, split into
/// its integer part and a nonnegative correction, with no cancellation inside.
struct ShapeTerms {
  std::int64_t integer = 0;
  long double correction = 0.0L;
};

ShapeTerms shape_terms(std::int64_t a, std::int64_t b) {
  const long double root = sqrtl(static_cast<long double>(a)) + sqrtl(static_cast<long double>(b));
  const auto diff = static_cast<long double>(a - b);
  return {2 * (a + b), diff * diff / (root * root)};
}

ShapeTerms shape_terms(LatticePoint p, LatticePoint q) {
  return shape_terms(q.i - p.i + 1, q.j - p.j + 1);
}

}  // namespace

double shape_d(LatticePoint p, LatticePoint q) {
  require_ordered(p, q);
  const double r = std::sqrt(static_cast<double>(q.i - p.i + 1)) +
                   std::sqrt(static_cast<double>(q.j - p.j + 1));
  return r * r;
}

long double shape_d_ld(LatticePoint p, LatticePoint q) {
  require_ordered(p, q);
  const ShapeTerms t = shape_terms(p, q);
  return static_cast<long double>(t.integer) - t.correction;
}

std::int64_t robust_floor(long double v) {
  const long double slack = 64.0L * LDBL_EPSILON * std::max(1.0L, fabsl(v));
  return static_cast<std::int64_t>(floorl(v + slack));
}

long double n_two_thirds(std::int64_t n) {
  const long double c = cbrtl(static_cast<long double>(n));
  return c * c;
}

long double n_pow(std::int64_t n, long double exponent) {
  return powl(static_cast<long double>(n), exponent);
}

std::int64_t floor_cbrt(std::int64_t n) {
  if (n < 0) throw std::invalid_argument("floor_cbrt of a negative number");
  auto r = static_cast<std::int64_t>(cbrtl(static_cast<long double>(n)));
  while (r * r * r > n) --r;
  while ((r + 1) * (r + 1) * (r + 1) <= n) ++r;
  return r;
}

void ShapeParams::validate() const {
  if (n < 1) throw std::invalid_argument("n must be a positive integer");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be >= 0");
  if (M < 1) throw std::invalid_argument("M must be a positive integer");
  if (!(ell > 0.0 && ell < 1.0)) throw std::invalid_argument("ell must lie in (0, 1)");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be > 0");
}

bool ShapeParams::admissible() const {
  const long double n23 = n_two_thirds(n);
  return n23 * static_cast<long double>(M) <
         n23 * n_pow(n, delta) * (1.0L - static_cast<long double>(ell));
}

bool ShapeParams::cylinder_fits() const {
  const long double n23 = n_two_thirds(n);
  return 8.0L * static_cast<long double>(gamma) * n23 <
         static_cast<long double>(ell) * n23 * n_pow(n, delta);
}

std::int64_t ShapeParams::offset() const {
  return robust_floor(static_cast<long double>(ell) * n_two_thirds(n) * n_pow(n, delta));
}

LatticePoint ShapeParams::barrier_start() const { return {offset() - M * n, -M * n}; }
LatticePoint ShapeParams::barrier_end() const { return {offset() + M * n, M * n}; }

LatticeEndpoints scale_endpoints(const ScaledQuery& q) {
  if (!(q.s < q.t)) throw std::invalid_argument("scaled query needs s < t");
  if (q.n < 1) throw std::invalid_argument("n must be a positive integer");
  const long double n = static_cast<long double>(q.n);
  const long double spread = 3.1748021039363989495L * n_two_thirds(q.n);  // 2^(5/3) n^(2/3)
  const std::int64_t shift =
      q.variant == ScalingVariant::FullUnshifted ? 0 : robust_floor(n_two_thirds(q.n) * n_pow(q.n, q.delta));
  const auto site = [&](double space, double time) {
    return LatticePoint{robust_floor(n * time + spread * space) + shift, robust_floor(n * time)};
  };
  return {site(q.x, q.s), site(q.y, q.t)};
}

namespace {

struct ValueMap {
  double slope, centre;
};

ValueMap value_map(const ScaledQuery& q) {
  const double n = static_cast<double>(q.n);
  const double c = std::cbrt(n);
  const double slope = std::exp2(-4.0 / 3.0) / c;
  const double centre = std::exp2(2.0 / 3.0) * c * c * (q.t - q.s) + std::exp2(4.0 / 3.0) * c * (q.y - q.x);
  return {slope, centre};
}

}  // namespace

double scale_value(double raw, const ScaledQuery& q) {
  const ValueMap m = value_map(q);
  return m.slope * raw - m.centre;
}

double unscale_value(double scaled, const ScaledQuery& q) {
  const ValueMap m = value_map(q);
  return (scaled + m.centre) / m.slope;
}

bool sqrt_inequality_holds(long double A, long double B) {
  if (!(A > std::max(0.0L, B))) throw std::invalid_argument("needs A > max(0, B)");
  if (A < -B) throw std::domain_error("square root of a negative number");
  return sqrtl(A * A - B * B) <= A - B * B / (2.0L * A);
}

namespace {

void require_in_interval(const ShapeParams& p, std::int64_t v, const char* name) {
  if (v < p.interval_lo() || v > p.interval_hi()) {
    throw std::invalid_argument(std::string(name) + " = " + std::to_string(v) +
                                " lies outside the deficit interval");
  }
}

long double finish(std::int64_t integer, std::initializer_list<long double> corrections) {
  NeumaierSum<long double> sum;
  sum += static_cast<long double>(integer);
  for (long double c : corrections) sum += -c;
  return sum.value();
}

}  // namespace

long double diag_deficit_i(const ShapeParams& p, std::int64_t i, std::int64_t j) {
  require_in_interval(p, i, "i");
  require_in_interval(p, j, "j");
  if (j < i || j - i > floor_cbrt(p.n)) {
    throw std::invalid_argument("two-term deficit needs i <= j <= i + n^(1/3)");
  }
  const ShapeTerms a = shape_terms(p.barrier_start(), {j, j});
  const ShapeTerms b = shape_terms({i, i}, p.barrier_end());
  return finish(a.integer + b.integer - 8 * p.M * p.n, {a.correction, b.correction});
}

long double diag_deficit_ii(const ShapeParams& p, std::int64_t i, std::int64_t j, std::int64_t s,
                            std::int64_t t) {
  for (auto [v, name] : {std::pair{i, "i"}, {j, "j"}, {s, "s"}, {t, "t"}}) {
    require_in_interval(p, v, name);
  }
  const std::int64_t g = floor_cbrt(p.n);
  if (!(i <= j && j <= s && s <= t) || t - s > g || j - i > g) {
    throw std::invalid_argument(
        "three-term deficit needs i <= j <= s <= t, j <= i + n^(1/3), t <= s + n^(1/3)");
  }
  const ShapeTerms a = shape_terms(p.barrier_start(), {j, j});
  const ShapeTerms mid = shape_terms({i, i}, {t, t});
  const ShapeTerms b = shape_terms({s, s}, p.barrier_end());
  return finish(a.integer + mid.integer + b.integer - 8 * p.M * p.n,
                {a.correction, mid.correction, b.correction});
}

namespace {

// The scanners search over offset coordinates whose feasible ranges depend only
// on the coordinates before them:
//   two-term:   (i, a) with j = i + a
//   three-term: (i, a, c, b) with j = i + a, s = j + c, t = s + b

struct Coords {
  std::array<std::int64_t, 4> v{};
};

class DeficitDomain {
 public:
  DeficitDomain(const ShapeParams& p, DeficitPart part)
      : p_(p), part_(part), lo_(p.interval_lo()), hi_(p.interval_hi()), g_(floor_cbrt(p.n)) {
    if (lo_ > hi_) throw std::invalid_argument("deficit interval is empty");
  }

  int dims() const { return part_ == DeficitPart::TwoTerm ? 2 : 4; }

  /// Feasible range of coordinate d given coordinates before it.
  void bounds(const Coords& c, int d, std::int64_t& lo, std::int64_t& hi) const {
    switch (d) {
      case 0:
        lo = lo_;
        hi = hi_;
        return;
      case 1:
        lo = 0;
        hi = std::min(g_, hi_ - c.v[0]);
        return;
      case 2:
        lo = 0;
        hi = hi_ - (c.v[0] + c.v[1]);
        return;
      default:
        lo = 0;
        hi = std::min(g_, hi_ - (c.v[0] + c.v[1] + c.v[2]));
        return;
    }
  }

  /// Clamps every coordinate into its range, in order.
  void clamp(Coords& c) const {
    for (int d = 0; d < dims(); ++d) {
      std::int64_t lo, hi;
      bounds(c, d, lo, hi);
      c.v[static_cast<std::size_t>(d)] = std::clamp(c.v[static_cast<std::size_t>(d)], lo, hi);
    }
  }

  std::array<std::int64_t, 4> point(const Coords& c) const {
    const std::int64_t i = c.v[0], j = i + c.v[1];
    if (part_ == DeficitPart::TwoTerm) return {i, j, 0, 0};
    const std::int64_t s = j + c.v[2];
    return {i, j, s, s + c.v[3]};
  }

  long double eval(const Coords& c) {
    ++evaluations;
    const auto q = point(c);
    return part_ == DeficitPart::TwoTerm ? diag_deficit_i(p_, q[0], q[1])
                                         : diag_deficit_ii(p_, q[0], q[1], q[2], q[3]);
  }

  std::int64_t strata(int d, const ScanOptions& opt) const {
    return (d == 0 || d == 2) ? opt.long_strata : opt.short_strata;
  }

  std::int64_t evaluations = 0;

 private:
  const ShapeParams& p_;
  DeficitPart part_;
  std::int64_t lo_, hi_, g_;
};

struct Candidate {
  long double value;
  Coords at;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.value != b.value) return a.value > b.value;
  return a.at.v < b.at.v;
}

/// Stratum sample points of [lo, hi]: both ends plus k-1 interior points.
std::vector<std::int64_t> strata_points(std::int64_t lo, std::int64_t hi, std::int64_t k) {
  std::vector<std::int64_t> out;
  if (hi - lo + 1 <= k + 1) {
    for (std::int64_t v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  for (std::int64_t s = 0; s <= k; ++s) out.push_back(lo + (hi - lo) * s / k);
  return out;
}

void coarse_scan(DeficitDomain& dom, const ScanOptions& opt, Coords& c, int d,
                 std::vector<std::int64_t>& stride, std::vector<Candidate>& out) {
  if (d == dom.dims()) {
    out.push_back({dom.eval(c), c});
    return;
  }
  std::int64_t lo, hi;
  dom.bounds(c, d, lo, hi);
  if (lo > hi) return;
  const std::int64_t k = dom.strata(d, opt);
  const auto du = static_cast<std::size_t>(d);
  stride[du] = std::max(stride[du], std::max<std::int64_t>(1, (hi - lo + k - 1) / k));
  for (std::int64_t v : strata_points(lo, hi, k)) {
    c.v[du] = v;
    coarse_scan(dom, opt, c, d + 1, stride, out);
  }
}

Candidate refine(DeficitDomain& dom, Candidate best, std::vector<std::int64_t> step) {
  const int D = dom.dims();
  for (;;) {
    bool moved = false;
    for (int d = 0; d < D && !moved; ++d) {
      for (int sign : {+1, -1}) {
        Coords c = best.at;
        c.v[static_cast<std::size_t>(d)] += sign * step[static_cast<std::size_t>(d)];
        dom.clamp(c);
        if (c.v == best.at.v) continue;
        const Candidate cand{dom.eval(c), c};
        if (better(cand, best)) {
          best = cand;
          moved = true;
          break;
        }
      }
    }
    if (moved) continue;
    bool shrunk = false;
    for (auto& s : step) {
      if (s > 1) {
        s = (s + 1) / 2;
        shrunk = true;
      }
    }
    if (shrunk) continue;
    // Unit steps in one coordinate exhausted; finish on the full 3^D neighbourhood.
    const int total = D == 2 ? 9 : 81;
    for (int code = 0; code < total && !moved; ++code) {
      Coords c = best.at;
      int rem = code;
      for (int d = 0; d < D; ++d) {
        c.v[static_cast<std::size_t>(d)] += rem % 3 - 1;
        rem /= 3;
      }
      dom.clamp(c);
      if (c.v == best.at.v) continue;
      const Candidate cand{dom.eval(c), c};
      if (better(cand, best)) {
        best = cand;
        moved = true;
      }
    }
    if (!moved) return best;
  }
}

DeficitMax to_result(DeficitPart part, const DeficitDomain& dom, const Candidate& best) {
  DeficitMax r;
  r.part = part;
  r.value = best.value;
  r.argmax = dom.point(best.at);
  r.evaluations = dom.evaluations;
  return r;
}

}  // namespace

DeficitMax scan_deficit(const ShapeParams& p, DeficitPart part, const ScanOptions& opt) {
  p.validate();
  if (opt.long_strata < 1 || opt.short_strata < 1 || opt.seeds < 1) {
    throw std::invalid_argument("scan options need positive strata and seeds");
  }
  DeficitDomain dom(p, part);
  std::vector<Candidate> coarse;
  std::vector<std::int64_t> stride(4, 1);
  Coords c;
  coarse_scan(dom, opt, c, 0, stride, coarse);
  if (coarse.empty()) throw std::invalid_argument("deficit constraint set is empty");

  const std::size_t k = std::min(opt.seeds, coarse.size());
  std::partial_sort(coarse.begin(), coarse.begin() + static_cast<std::ptrdiff_t>(k), coarse.end(),
                    better);
  Candidate best = coarse.front();
  for (std::size_t s = 0; s < k; ++s) {
    const Candidate r = refine(dom, coarse[s], stride);
    if (better(r, best)) best = r;
  }
  return to_result(part, dom, best);
}

DeficitMax scan_deficit_i_exhaustive(const ShapeParams& p) {
  p.validate();
  DeficitDomain dom(p, DeficitPart::TwoTerm);
  std::optional<Candidate> best;
  Coords c;
  std::int64_t lo0, hi0;
  dom.bounds(c, 0, lo0, hi0);
  for (c.v[0] = lo0; c.v[0] <= hi0; ++c.v[0]) {
    std::int64_t lo1, hi1;
    dom.bounds(c, 1, lo1, hi1);
    for (c.v[1] = lo1; c.v[1] <= hi1; ++c.v[1]) {
      const Candidate cand{dom.eval(c), c};
      if (!best || better(cand, *best)) best = cand;
    }
  }
  return to_result(DeficitPart::TwoTerm, dom, *best);
}

namespace {

long double deficit_scale(const ShapeParams& p) {
  return n_pow(p.n, 1.0L / 3.0L + 2.0L * static_cast<long double>(p.delta));
}

}  // namespace

long double deficit_c_raw(const ShapeParams& p) {
  const auto b = static_cast<long double>(p.offset());
  return b * b / (4.0L * static_cast<long double>(p.M * p.n) + 2.0L) / deficit_scale(p);
}

long double deficit_c_absorbed(const ShapeParams& p) {
  return deficit_c_raw(p) - 4.0L * n_pow(p.n, -2.0L * static_cast<long double>(p.delta));
}

DeficitFit fit_deficit_constant(const ShapeParams& base, const std::vector<std::int64_t>& n_sweep,
                                DeficitPart part, const ScanOptions& opt) {
  if (n_sweep.size() < 4) throw std::invalid_argument("deficit fit needs at least four values of n");
  std::vector<std::int64_t> ns = n_sweep;
  std::sort(ns.begin(), ns.end());
  if (std::adjacent_find(ns.begin(), ns.end()) != ns.end()) {
    throw std::invalid_argument("deficit sweep has repeated n");
  }
  DeficitFit fit;
  for (std::int64_t n : ns) {
    DeficitSweepRow row;
    row.params = base;
    row.params.n = n;
    row.part = part;
    row.max = scan_deficit(row.params, part, opt);
    row.c_n = -row.max.value / deficit_scale(row.params);
    row.c_raw = deficit_c_raw(row.params);
    row.c_absorbed = deficit_c_absorbed(row.params);
    fit.rows.push_back(row);
  }
  fit.c_hat = fit.rows.front().c_n;
  for (const auto& r : fit.rows) fit.c_hat = std::min(fit.c_hat, r.c_n);
  for (std::size_t k = fit.rows.size(); k-- > 0;) {
    if (fit.rows[k].max.value >= 0.0L) break;
    fit.n0_hat = fit.rows[k].params.n;
  }
  fit.ok = fit.rows.back().max.value < 0.0L;
  return fit;
}

}  // namespace lppkit
