#include "lppkit/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "lppkit/parallel.hpp"
#include "lppkit/stats.hpp"

namespace lppkit {

namespace {

/// Integer k with k*h the grid values inside [-extent, extent].
std::int64_t grid_steps(double extent, double h) {
  return static_cast<std::int64_t>(std::floor(extent / h + 1e-9));
}

constexpr long double kTwoFiveThirds = 3.1748021039363989495L;

}  // namespace

CompactWindow CompactWindow::uniform(double M, double h, double space_extent) {
  if (!(M > 0.0) || !(h > 0.0) || !(space_extent >= 0.0) || space_extent > M) {
    throw std::invalid_argument("window needs M > 0, h > 0 and 0 <= X <= M");
  }
  CompactWindow w;
  w.M = M;
  w.h = h;
  w.space_extent = space_extent;
  const std::int64_t kt = grid_steps(M, h);
  const std::int64_t kx = grid_steps(space_extent, h);
  for (std::int64_t s = -kt; s <= kt; ++s) {
    for (std::int64_t t = s + 1; t <= kt; ++t) {
      for (std::int64_t x = -kx; x <= kx; ++x) {
        for (std::int64_t y = -kx; y <= kx; ++y) {
          w.points.push_back({static_cast<double>(x) * h, static_cast<double>(s) * h,
                              static_cast<double>(y) * h, static_cast<double>(t) * h});
        }
      }
    }
  }
  return w;
}

double CompactWindow::admissible_extent(const ShapeParams& p, double h) {
  p.validate();
  const long double room =
      (1.0L - static_cast<long double>(p.ell)) * n_two_thirds(p.n) * n_pow(p.n, p.delta);
  const long double unit = kTwoFiveThirds * n_two_thirds(p.n);
  std::int64_t k = grid_steps(static_cast<double>(p.M), h);
  while (k > 0 && !(unit * static_cast<long double>(k) * static_cast<long double>(h) < room)) --k;
  return static_cast<double>(k) * h;
}

CompactWindow CompactWindow::for_params(const ShapeParams& p, double h) {
  return uniform(static_cast<double>(p.M), h, admissible_extent(p, h));
}

LatticeEndpoints window_endpoints(const WindowPoint& w, const ShapeParams& p) {
  return scale_endpoints({w.x, w.s, w.y, w.t, p.n, p.delta, ScalingVariant::HalfShifted});
}

std::optional<std::string> window_inadmissible(const CompactWindow& w, const ShapeParams& p) {
  const std::int64_t rows = p.M * p.n;
  for (const WindowPoint& q : w.points) {
    if (!(q.s < q.t)) return "window point with s >= t";
    const LatticeEndpoints e = window_endpoints(q, p);
    for (LatticePoint site : {e.start, e.end}) {
      if (site.i - site.j < 1) {
        return "window lattice point " + to_string(site) + " is not strictly below the diagonal";
      }
      if (site.j < -rows || site.j > rows) {
        return "window lattice point " + to_string(site) + " lies outside the barrier rows";
      }
    }
  }
  return std::nullopt;
}

LatticeRect coupled_region(const ShapeParams& p, const CompactWindow& w) {
  LatticeRect r = LatticeRect::spanning(p.barrier_start(), p.barrier_end());
  for (const WindowPoint& q : w.points) {
    const LatticeEndpoints e = window_endpoints(q, p);
    r = r.united(e.start).united(e.end);
  }
  return r;
}

namespace {

BarrierGeodesics barrier_geodesics(const PassageTable& table, LatticePoint end) {
  BarrierGeodesics b;
  b.rightmost = geodesic_from_table(table, end, Selection::Rightmost);
  b.leftmost = geodesic_from_table(table, end, Selection::Leftmost);
  b.touches_rightmost = touches_diagonal(b.rightmost);
  b.touches_leftmost = touches_diagonal(b.leftmost);
  b.ambiguous = b.rightmost.sites != b.leftmost.sites;
  b.event = b.touches_rightmost || b.touches_leftmost || b.ambiguous;
  return b;
}

bool right_of(const LevelProfile& barrier, LatticePoint site) {
  const std::int64_t edge = barrier.at(site.j);
  return edge != LevelProfile::kAbsent && site.i >= edge;
}

}  // namespace

BarrierOutcome run_coupled_instance(const WeightWindow& weights, const ShapeParams& p,
                                    const CompactWindow& window, const KernelBudget& budget) {
  p.validate();
  if (auto why = window_inadmissible(window, p)) throw std::invalid_argument(*why);
  const LatticeRect need = coupled_region(p, window);
  const LatticeRect& have = weights.rect();
  if (!have.contains({need.i0, need.j0}) || !have.contains({need.i1, need.j1})) {
    throw std::invalid_argument("weight window does not cover the coupled region");
  }

  const LatticePoint x1 = p.barrier_start();
  const LatticePoint x2 = p.barrier_end();
  const auto full = DomainRestriction::full_plane();
  const auto half = DomainRestriction::half_plane();

  BarrierOutcome out;
  {
    const PassageTable tf(weights, x1, x2, full, budget);
    out.full = barrier_geodesics(tf, x2);
  }
  {
    const PassageTable th(weights, x1, x2, half, budget);
    out.half = barrier_geodesics(th, x2);
  }
  const LevelProfile edge_full = leftmost_profile(out.full.rightmost);
  const LevelProfile edge_half = leftmost_profile(out.half.rightmost);

  const std::size_t count = window.points.size();
  out.value_half.assign(count, 0.0);
  out.value_full.assign(count, 0.0);
  out.agreement.assign(count, true);
  out.sandwiched = true;
  out.window_avoids = true;

  std::vector<LatticeEndpoints> ends(count);
  std::map<LatticePoint, std::vector<std::size_t>> by_start;
  for (std::size_t k = 0; k < count; ++k) {
    ends[k] = window_endpoints(window.points[k], p);
    by_start[ends[k].start].push_back(k);
    for (LatticePoint site : {ends[k].start, ends[k].end}) {
      if (!right_of(edge_full, site) || !right_of(edge_half, site)) out.sandwiched = false;
    }
  }

  for (const auto& [start, members] : by_start) {
    LatticePoint corner = start;
    for (std::size_t k : members) {
      corner.i = std::max(corner.i, ends[k].end.i);
      corner.j = std::max(corner.j, ends[k].end.j);
    }
    const PassageTable tf(weights, start, corner, full, budget);
    const PassageTable th(weights, start, corner, half, budget);
    for (std::size_t k : members) {
      const LatticePoint end = ends[k].end;
      const PassageValue vf = tf.value(end);
      const PassageValue vh = th.value(end);
      out.value_full[k] = vf.value;
      out.value_half[k] = vh.value;
      const bool agree = vf.status == vh.status && vf.value == vh.value;
      out.agreement[k] = agree;
      if (!agree) ++out.disagreements;
      if (vf.ok() && touches_diagonal(geodesic_from_table(tf, end, Selection::Rightmost))) {
        out.window_avoids = false;
      }
      if (vh.ok() && touches_diagonal(geodesic_from_table(th, end, Selection::Rightmost))) {
        out.window_avoids = false;
      }
    }
  }
  return out;
}

BarrierOutcome run_coupled_instance(std::uint64_t seed, double alpha, const ShapeParams& p,
                                    const CompactWindow& window, const KernelBudget& budget) {
  p.validate();
  const CoupledWeightField field(seed, alpha);
  const LatticeRect region = coupled_region(p, window);
  if (region.cells() > budget.max_table_cells) throw BudgetExceeded(region.cells(), budget.max_table_cells);
  const WeightWindow weights(field, region);
  return run_coupled_instance(weights, p, window, budget);
}

std::uint64_t replica_seed(std::uint64_t master_seed, std::int64_t n, std::size_t k) {
  return derive_seed(master_seed, static_cast<std::uint64_t>(n), k);
}

namespace {

void strip_paths(BarrierOutcome& o) {
  for (BarrierGeodesics* b : {&o.half, &o.full}) {
    b->rightmost.sites.clear();
    b->rightmost.sites.shrink_to_fit();
    b->leftmost.sites.clear();
    b->leftmost.sites.shrink_to_fit();
  }
}

}  // namespace

AgreementTrend agreement_trend(const std::vector<AgreementRow>& rows) {
  AgreementTrend tr;
  if (rows.empty()) return tr;
  const AgreementRow& a = rows.front();
  const AgreementRow& b = rows.back();
  const double denom = std::hypot(a.std_error, b.std_error);
  const double diff = a.p_hat - b.p_hat;
  tr.z_first_last = denom > 0.0 ? diff / denom : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double rise = rows[k].p_hat - rows[k - 1].p_hat;
    if (rise > 2.0 * std::hypot(rows[k].std_error, rows[k - 1].std_error)) {
      tr.decreasing_within_noise = false;
    }
  }
  if (rows.size() >= 2) {
    // A zero-variance row still gets the weight of a single observed event.
    double sw = 0, sx = 0, sy = 0;
    std::vector<double> w(rows.size()), x(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const double floor_var = 1.0 / std::pow(static_cast<double>(std::max<std::size_t>(rows[k].replicas, 1)), 2);
      w[k] = 1.0 / std::max(rows[k].std_error * rows[k].std_error, floor_var);
      x[k] = std::log(static_cast<double>(rows[k].n));
      sw += w[k];
      sx += w[k] * x[k];
      sy += w[k] * rows[k].p_hat;
    }
    const double xm = sx / sw, ym = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      sxx += w[k] * (x[k] - xm) * (x[k] - xm);
      sxy += w[k] * (x[k] - xm) * (rows[k].p_hat - ym);
    }
    if (sxx > 0) {
      tr.slope = sxy / sxx;
      tr.slope_stderr = std::sqrt(1.0 / sxx);
    }
  }
  return tr;
}

AgreementEstimate estimate_agreement_probability(const std::vector<ShapeParams>& sweep,
                                                 const AgreementConfig& cfg,
                                                 std::vector<ReplicaRecord>* records) {
  if (sweep.empty()) throw std::invalid_argument("agreement sweep is empty");
  const auto smallest = std::min_element(sweep.begin(), sweep.end(),
                                         [](const ShapeParams& a, const ShapeParams& b) { return a.n < b.n; });
  const CompactWindow window = cfg.window ? *cfg.window : CompactWindow::for_params(*smallest, cfg.h);
  for (const ShapeParams& p : sweep) {
    p.validate();
    if (auto why = window_inadmissible(window, p)) {
      throw std::invalid_argument("n = " + std::to_string(p.n) + ": " + *why);
    }
  }

  AgreementEstimate est;
  for (const ShapeParams& p : sweep) {
    std::vector<ReplicaRecord> recs(cfg.replicas);
    parallel_for(cfg.replicas, cfg.threads, [&](std::size_t k) {
      ReplicaRecord& r = recs[k];
      r.n = p.n;
      r.index = k;
      r.seed = replica_seed(cfg.master_seed, p.n, k);
      try {
        r.outcome = run_coupled_instance(r.seed, cfg.alpha, p, window, cfg.budget);
        strip_paths(*r.outcome);
      } catch (const std::exception& e) {
        r.outcome.reset();
        r.error_code = classify_exception(e);
        r.error = e.what();
      }
    });

    AgreementRow row;
    row.n = p.n;
    for (const ReplicaRecord& r : recs) {
      if (!r.outcome) {
        ++row.errors;
        continue;
      }
      const BarrierOutcome& o = *r.outcome;
      ++row.replicas;
      row.disagree += o.all_agree() ? 0 : 1;
      row.event_H += o.event_H() ? 1 : 0;
      row.event_Z2 += o.event_Z2() ? 1 : 0;
      row.unsandwiched += o.sandwiched ? 0 : 1;
      if (!o.barrier_implication_holds() || !o.geodesic_implication_holds()) ++row.implication_exceptions;
    }
    const auto N = static_cast<double>(row.replicas);
    if (row.replicas > 0) {
      row.p_hat = static_cast<double>(row.disagree) / N;
      row.p_A_H = static_cast<double>(row.event_H) / N;
      row.p_A_Z2 = static_cast<double>(row.event_Z2) / N;
    }
    row.std_error = binomial_stderr(row.p_hat, row.replicas);
    est.rows.push_back(row);
    if (records) records->insert(records->end(), std::make_move_iterator(recs.begin()),
                                 std::make_move_iterator(recs.end()));
  }
  est.trend = agreement_trend(est.rows);
  return est;
}

GridSequence build_grid_sequence(const ShapeParams& p, std::int64_t m0) {
  p.validate();
  if (m0 < 1) throw std::invalid_argument("m0 must be positive");
  const std::int64_t g = floor_cbrt(p.n);
  if (!(static_cast<long double>(m0) < cbrtl(static_cast<long double>(p.n)))) {
    throw std::invalid_argument("grid sequence needs n^(1/3) > m0");
  }
  const std::int64_t w0 = p.interval_lo();
  const std::int64_t wk = p.interval_hi();
  if (wk - w0 < 2 * g) throw std::invalid_argument("interval I is shorter than two grid gaps");

  GridSequence seq;
  seq.m0 = m0;
  seq.w.push_back(w0);
  seq.w.push_back(w0 + g);
  const std::int64_t inner_end = wk - g;
  const std::int64_t span = inner_end - seq.w.back();
  if (span > 0) {
    const std::int64_t q = span / g;
    const std::int64_t r = span % g;
    std::vector<std::int64_t> gaps(static_cast<std::size_t>(q), g);
    if (r >= m0) {
      gaps.push_back(r);
    } else if (r > 0) {
      // Merge the remainder with the fewest trailing gaps that split evenly into [m0, g].
      std::int64_t t = 1;
      while (t <= q && (t * g + r) / (t + 1) < m0) ++t;
      if (t > q) throw std::invalid_argument("cannot rebalance the final grid gaps");
      const std::int64_t total = t * g + r;
      gaps.resize(static_cast<std::size_t>(q - t));
      for (std::int64_t k = 0; k <= t; ++k) gaps.push_back(total / (t + 1) + (k < total % (t + 1) ? 1 : 0));
    }
    for (std::int64_t gap : gaps) seq.w.push_back(seq.w.back() + gap);
  }
  seq.w.push_back(wk);
  return seq;
}

std::optional<std::string> grid_sequence_violation(const GridSequence& s, const ShapeParams& p) {
  const std::int64_t g = floor_cbrt(p.n);
  if (s.w.size() < 3) return "grid sequence has fewer than three points";
  const std::size_t k = s.w.size() - 1;
  if (s.w[0] != p.interval_lo()) return "w_0 != floor(ell n^(2/3+delta)) - Mn";
  if (s.w[1] != p.interval_lo() + g) return "w_1 != w_0 + floor(n^(1/3))";
  if (s.w[k - 1] != p.interval_hi() - g) return "w_{k-1} != Mn - floor(n^(1/3))";
  if (s.w[k] != p.interval_hi()) return "w_k != Mn";
  for (std::size_t j = 0; j < k; ++j) {
    const std::int64_t gap = s.w[j + 1] - s.w[j];
    if (gap < s.m0 || gap > g) {
      return "gap w_" + std::to_string(j + 1) + " - w_" + std::to_string(j) + " = " +
             std::to_string(gap) + " outside [m0, n^(1/3)]";
    }
  }
  return std::nullopt;
}

template <WeightSource S>
PassageValue pinned_to_diagonal(const S& src, LatticePoint p, std::int64_t w,
                                const KernelBudget& budget) {
  const LatticePoint d{w, w};
  if (p != d && on_diagonal(p)) throw std::invalid_argument("pinned segment starts on the diagonal");
  return last_passage(src, p, d, DomainRestriction::half_plane_off_diagonal(), budget);
}

template <WeightSource S>
PassageValue pinned_from_diagonal(const S& src, std::int64_t w, LatticePoint q,
                                  const KernelBudget& budget) {
  const LatticePoint d{w, w};
  const auto r = DomainRestriction::half_plane_off_diagonal();
  if (q == d) return {0.0, PassageStatus::Ok, {d, q, r}};
  if (on_diagonal(q)) throw std::invalid_argument("pinned segment ends on the diagonal");
  // The only step out of (w,w) that stays in the half plane is to (w+1, w).
  PassageValue v = last_passage(src, {w + 1, w}, q, r, budget);
  v.query.start = d;
  return v;
}

namespace {

double require_ok(const PassageValue& v, const char* what) {
  if (!v.ok()) throw std::domain_error(std::string("no admissible path for ") + what);
  return v.value;
}

}  // namespace

template <WeightSource S>
ProofChainValues proof_chain_values(const S& src, const ShapeParams& p, const GridSequence& g,
                                    std::int64_t i, std::int64_t j, const KernelBudget& budget) {
  if (i < 0 || i > j || j > g.k() - 1) throw std::out_of_range("proof chain needs 0 <= i <= j <= k-1");
  const auto w = [&](std::int64_t k) { return g.w[static_cast<std::size_t>(k)]; };
  const LatticePoint x1 = p.barrier_start();
  const LatticePoint x2 = p.barrier_end();
  ProofChainValues v;
  v.full_head = require_ok(lpp_full(src, x1, {w(i + 1), w(i + 1)}, budget), "full head");
  v.half_middle = require_ok(lpp_half(src, {w(i), w(i)}, {w(j + 1), w(j + 1)}, budget), "half middle");
  v.full_tail = require_ok(lpp_full(src, {w(j), w(j)}, x2, budget), "full tail");
  v.pinned_head = require_ok(pinned_to_diagonal(src, x1, w(i + 1), budget), "pinned head");
  v.pinned_tail = require_ok(pinned_from_diagonal(src, w(j), x2, budget), "pinned tail");
  v.L_ij = v.full_head + v.half_middle + v.full_tail;
  v.LR_ij = v.pinned_head + v.half_middle + v.pinned_tail;
  return v;
}

template <WeightSource S>
BracketCheck bracket_chain_check(const S& src, const ShapeParams& p, const GridSequence& g,
                                 const Geodesic& full_barrier, const KernelBudget& budget) {
  BracketCheck first;
  const LatticePoint x1 = p.barrier_start();
  const LatticePoint x2 = p.barrier_end();
  std::map<std::int64_t, double> rhs_of;
  for (const LatticePoint& site : full_barrier.sites) {
    if (!on_diagonal(site)) continue;
    const std::int64_t t = site.i;
    auto it = std::upper_bound(g.w.begin(), g.w.end(), t);
    if (it == g.w.begin()) throw std::out_of_range("diagonal contact left of w_0");
    auto b = static_cast<std::int64_t>(it - g.w.begin()) - 1;
    b = std::min(b, g.k() - 1);
    auto found = rhs_of.find(b);
    if (found == rhs_of.end()) {
      const auto wb = g.w[static_cast<std::size_t>(b)];
      const auto wb1 = g.w[static_cast<std::size_t>(b + 1)];
      const double rhs = require_ok(lpp_full(src, x1, {wb1, wb1}, budget), "bracket head") +
                         require_ok(lpp_full(src, {wb, wb}, x2, budget), "bracket tail");
      found = rhs_of.emplace(b, rhs).first;
    }
    BracketCheck c;
    c.touched = true;
    c.touch = t;
    c.bracket = b;
    c.lhs = full_barrier.value;
    c.rhs = found->second;
    // The two sides accumulate the same path weights in different orders.
    c.holds = c.lhs <= c.rhs + 1e-12 * std::abs(c.rhs);
    if (!c.holds) return c;
    if (!first.touched) first = c;
  }
  return first;
}

double tail_center(const TailGeometry& g) {
  switch (g.model) {
    case TailModel::Full: {
      const double r = std::sqrt(static_cast<double>(g.m)) + std::sqrt(static_cast<double>(g.m2));
      return r * r;
    }
    case TailModel::Half:
    case TailModel::Cylinder:
      return 4.0 * static_cast<double>(g.m);
  }
  return 0.0;
}

double tail_unit(const TailGeometry& g) {
  switch (g.model) {
    case TailModel::Full:
      return std::cbrt(static_cast<double>(g.m2));
    case TailModel::Half:
      return std::cbrt(static_cast<double>(g.m));
    case TailModel::Cylinder:
      return std::cbrt(static_cast<double>(g.cylinder_n));
  }
  return 1.0;
}

double sample_tail_value(const TailGeometry& g, std::uint64_t seed) {
  const CoupledWeightField field(seed, g.alpha);
  switch (g.model) {
    case TailModel::Full:
      return require_ok(lpp_full(field, {0, 0}, {g.m, g.m2}), "full tail sample");
    case TailModel::Half:
      return require_ok(lpp_half(field, {1, 1}, {g.m, g.m}), "half tail sample");
    case TailModel::Cylinder: {
      const double hw = 2.0 * g.gamma * static_cast<double>(n_two_thirds(g.cylinder_n));
      return require_ok(lpp_cylinder(field, {1, 1}, g.m - 1, hw), "cylinder tail sample");
    }
  }
  return 0.0;
}

std::uint64_t tail_seed(const TailGeometry& g, std::uint64_t master_seed, std::size_t k) {
  const std::uint64_t stream = (static_cast<std::uint64_t>(g.model) << 48) ^ static_cast<std::uint64_t>(g.m);
  return derive_seed(master_seed, stream, k);
}

std::vector<double> sample_tail_values(const TailGeometry& g, std::uint64_t master_seed,
                                       std::size_t replicas, unsigned threads) {
  std::vector<double> out(replicas);
  parallel_for(replicas, threads,
               [&](std::size_t k) { out[k] = sample_tail_value(g, tail_seed(g, master_seed, k)); });
  return out;
}

std::vector<TailRow> empirical_tail(const TailGeometry& g, const std::vector<double>& r_grid,
                                    std::size_t replicas, std::uint64_t master_seed,
                                    unsigned threads) {
  const std::vector<double> v = sample_tail_values(g, master_seed, replicas, threads);
  const double c = tail_center(g);
  const double u = tail_unit(g);
  std::vector<TailRow> rows;
  for (double r : r_grid) {
    std::size_t up = 0, down = 0;
    for (double x : v) {
      if (x - c >= r * u) ++up;
      if (x - c <= -r * u) ++down;
    }
    const double N = static_cast<double>(std::max<std::size_t>(v.size(), 1));
    rows.push_back({r, static_cast<double>(up) / N, static_cast<double>(down) / N});
  }
  return rows;
}

#define LPPKIT_INSTANTIATE(Source)                                                               \
  template PassageValue pinned_to_diagonal<Source>(const Source&, LatticePoint, std::int64_t,     \
                                                   const KernelBudget&);                          \
  template PassageValue pinned_from_diagonal<Source>(const Source&, std::int64_t, LatticePoint,   \
                                                     const KernelBudget&);                        \
  template ProofChainValues proof_chain_values<Source>(const Source&, const ShapeParams&,         \
                                                       const GridSequence&, std::int64_t,         \
                                                       std::int64_t, const KernelBudget&);        \
  template BracketCheck bracket_chain_check<Source>(const Source&, const ShapeParams&,            \
                                                    const GridSequence&, const Geodesic&,          \
                                                    const KernelBudget&);

LPPKIT_INSTANTIATE(CoupledWeightField)
LPPKIT_INSTANTIATE(WeightWindow)

#undef LPPKIT_INSTANTIATE

}  // namespace lppkit
