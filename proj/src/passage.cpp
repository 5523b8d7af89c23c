#include "lppkit/passage.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace lppkit {

bool CylinderSpec::contains(LatticePoint p) const {
  const std::int64_t sum = p.i + p.j;
  const std::int64_t base = anchor.i + anchor.j;
  if (sum < base || sum > base + 2 * xi_n) return false;
  const std::int64_t drift = (p.j - p.i) - (anchor.j - anchor.i);
  return static_cast<double>(drift < 0 ? -drift : drift) <= halfwidth;
}

DomainRestriction DomainRestriction::full_plane() { return {}; }

DomainRestriction DomainRestriction::half_plane() {
  DomainRestriction r;
  r.kind_ = DomainKind::HalfPlane;
  return r;
}

DomainRestriction DomainRestriction::half_plane_off_diagonal() {
  DomainRestriction r = half_plane();
  r.off_diagonal_ = true;
  return r;
}

DomainRestriction DomainRestriction::cylinder(LatticePoint anchor, std::int64_t xi_n,
                                              double halfwidth) {
  if (xi_n < 0) throw std::invalid_argument("cylinder length must be nonnegative");
  if (!(halfwidth > 0.0) || !std::isfinite(halfwidth)) {
    throw std::invalid_argument("cylinder half-width must be positive and finite");
  }
  DomainRestriction r;
  r.kind_ = DomainKind::Cylinder;
  r.cylinder_ = {anchor, xi_n, halfwidth};
  return r;
}

bool DomainRestriction::contains(LatticePoint p) const {
  switch (kind_) {
    case DomainKind::FullPlane:
      return true;
    case DomainKind::HalfPlane:
      return off_diagonal_ ? p.i > p.j : p.i >= p.j;
    case DomainKind::Cylinder:
      return cylinder_.contains(p);
  }
  return false;
}

void DomainRestriction::row_span(std::int64_t j, std::int64_t clip_lo, std::int64_t clip_hi,
                                 std::int64_t& lo, std::int64_t& hi) const {
  lo = clip_lo;
  hi = clip_hi;
  switch (kind_) {
    case DomainKind::FullPlane:
      break;
    case DomainKind::HalfPlane:
      lo = std::max(lo, off_diagonal_ ? j + 1 : j);
      break;
    case DomainKind::Cylinder: {
      const auto& c = cylinder_;
      const std::int64_t base = c.anchor.i + c.anchor.j;
      lo = std::max(lo, base - j);
      hi = std::min(hi, base + 2 * c.xi_n - j);
      const std::int64_t centre = j - (c.anchor.j - c.anchor.i);
      const auto reach = static_cast<std::int64_t>(std::floor(c.halfwidth));
      lo = std::max(lo, centre - reach);
      hi = std::min(hi, centre + reach);
      break;
    }
  }
}

namespace {

void require_half_plane(const DomainRestriction& r, LatticePoint p) {
  if (r.kind() == DomainKind::HalfPlane && !in_half_plane(p)) throw OutsideHalfPlane(p);
}

/// Endpoint admissibility shared by every kernel. Returns the final answer when
/// the query is settled without a sweep.
std::optional<PassageValue> screen(const PassageQuery& q) {
  require_half_plane(q.restriction, q.start);
  require_half_plane(q.restriction, q.end);
  if (!precedes(q.start, q.end)) return PassageValue{0.0, PassageStatus::Unordered, q};
  if (q.restriction.kind() == DomainKind::Cylinder &&
      (!q.restriction.contains(q.start) || !q.restriction.contains(q.end))) {
    return PassageValue{0.0, PassageStatus::NoAdmissiblePath, q};
  }
  if (q.start == q.end) return PassageValue{0.0, PassageStatus::Ok, q};
  return std::nullopt;
}

PassageValue from_predecessors(const PassageQuery& q, double left, double below) {
  const double best = std::max(left, below);
  if (best == kUnreachable) return {0.0, PassageStatus::NoAdmissiblePath, q};
  return {best, PassageStatus::Ok, q};
}

/// Fills one DP row. `below` is the previous row or nullptr on the first row;
/// both buffers are indexed by column - start.i.
template <WeightSource S>
inline void sweep_row(const S& src, const DomainRestriction& r, LatticePoint start,
                      std::int64_t j, std::int64_t col_hi, const double* below, double* row) {
  const std::int64_t width = col_hi - start.i + 1;
  std::fill(row, row + width, kUnreachable);
  std::int64_t lo, hi;
  r.row_span(j, start.i, col_hi, lo, hi);
  // The start site is always admissible, including a pinned diagonal start.
  if (j == start.j && lo == start.i + 1 && r.off_diagonal()) lo = start.i;
  for (std::int64_t i = lo; i <= hi; ++i) {
    const std::int64_t c = i - start.i;
    const double w = site_weight(src, r, i, j);
    if (below == nullptr && i == start.i) {
      row[c] = w;
      continue;
    }
    const double left = c > 0 ? row[c - 1] : kUnreachable;
    const double down = below != nullptr ? below[c] : kUnreachable;
    row[c] = w + std::max(left, down);
  }
}

void check_budget(std::int64_t cells, std::int64_t limit) {
  if (cells > limit) throw BudgetExceeded(cells, limit);
}

}  // namespace

template <WeightSource S>
PassageValue last_passage(const S& src, LatticePoint start, LatticePoint end,
                          const DomainRestriction& restriction, const KernelBudget& budget) {
  const PassageQuery q{start, end, restriction};
  if (auto settled = screen(q)) return *settled;

  const std::int64_t width = end.i - start.i + 1;
  const std::int64_t height = end.j - start.j + 1;
  check_budget(width * height, budget.max_cells);

  std::vector<double> prev(static_cast<std::size_t>(width), kUnreachable);
  std::vector<double> cur(static_cast<std::size_t>(width), kUnreachable);
  for (std::int64_t j = start.j; j < end.j; ++j) {
    sweep_row(src, restriction, start, j, end.i, j == start.j ? nullptr : prev.data(), cur.data());
    std::swap(prev, cur);
  }
  // Only the last row's prefix is needed: the end weight itself is excluded.
  const double below = height >= 2 ? prev[static_cast<std::size_t>(width - 1)] : kUnreachable;
  double left = kUnreachable;
  if (width >= 2) {
    sweep_row(src, restriction, start, end.j, end.i - 1, height >= 2 ? prev.data() : nullptr,
              cur.data());
    left = cur[static_cast<std::size_t>(width - 2)];
  }
  return from_predecessors(q, left, below);
}

template <WeightSource S>
std::vector<PassageValue> last_passage_row(const S& src, LatticePoint start, std::int64_t end_row,
                                           std::int64_t col_first, std::int64_t col_last,
                                           const DomainRestriction& restriction,
                                           const KernelBudget& budget) {
  if (col_last < col_first) throw std::invalid_argument("empty column range");
  std::vector<PassageValue> out;
  out.reserve(static_cast<std::size_t>(col_last - col_first + 1));

  const std::int64_t col_hi = std::max(col_last, start.i);
  const std::int64_t width = col_hi - start.i + 1;
  std::vector<double> prev(static_cast<std::size_t>(width), kUnreachable);
  std::vector<double> cur(static_cast<std::size_t>(width), kUnreachable);
  const bool swept = end_row >= start.j && col_last >= start.i;
  if (swept) {
    check_budget(width * (end_row - start.j + 1), budget.max_cells);
    for (std::int64_t j = start.j; j <= end_row; ++j) {
      std::swap(prev, cur);
      sweep_row(src, restriction, start, j, col_hi, j == start.j ? nullptr : prev.data(),
                cur.data());
    }
  }
  for (std::int64_t c = col_first; c <= col_last; ++c) {
    const PassageQuery q{start, {c, end_row}, restriction};
    if (auto settled = screen(q)) {
      out.push_back(*settled);
      continue;
    }
    const auto k = static_cast<std::size_t>(c - start.i);
    const double left = k > 0 ? cur[k - 1] : kUnreachable;
    const double below = end_row > start.j ? prev[k] : kUnreachable;
    out.push_back(from_predecessors(q, left, below));
  }
  return out;
}

template <WeightSource S>
PassageTable::PassageTable(const S& src, LatticePoint start, LatticePoint corner,
                           const DomainRestriction& restriction, const KernelBudget& budget)
    : start_(start), corner_(corner), restriction_(restriction) {
  if (!precedes(start, corner)) throw std::invalid_argument("table corner must follow its start");
  require_half_plane(restriction, start);
  width_ = corner.i - start.i + 1;
  const std::int64_t height = corner.j - start.j + 1;
  check_budget(width_ * height, budget.max_table_cells);
  g_.assign(static_cast<std::size_t>(width_ * height), kUnreachable);
  if (restriction.kind() == DomainKind::Cylinder && !restriction.contains(start)) return;
  for (std::int64_t j = start.j; j <= corner.j; ++j) {
    double* row = g_.data() + (j - start.j) * width_;
    sweep_row(src, restriction, start, j, corner.i, j == start.j ? nullptr : row - width_, row);
  }
}

void PassageTable::check_endpoint(LatticePoint end) const {
  if (end.i > corner_.i || end.j > corner_.j) {
    throw std::out_of_range("endpoint " + to_string(end) + " beyond table corner " +
                            to_string(corner_));
  }
}

PassageValue PassageTable::value(LatticePoint end) const {
  check_endpoint(end);
  const PassageQuery q{start_, end, restriction_};
  if (auto settled = screen(q)) return *settled;
  return from_predecessors(q, inclusive({end.i - 1, end.j}), inclusive({end.i, end.j - 1}));
}

std::vector<LatticePoint> PassageTable::backtrack(LatticePoint end, Tie tie) const {
  const PassageValue v = value(end);
  if (!v.ok()) throw std::domain_error("no admissible path to " + to_string(end));
  std::vector<LatticePoint> path{end};
  LatticePoint p = end;
  while (p != start_) {
    const LatticePoint left{p.i - 1, p.j};
    const LatticePoint down{p.i, p.j - 1};
    const double gl = inclusive(left);
    const double gd = inclusive(down);
    const double best = std::max(gl, gd);
    // Walking backwards, a step down keeps the path on the lower-right side.
    if (tie == Tie::Rightmost) {
      p = (gd == best) ? down : left;
    } else {
      p = (gl == best) ? left : down;
    }
    path.push_back(p);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

#define LPPKIT_INSTANTIATE(Source)                                                             \
  template PassageValue last_passage<Source>(const Source&, LatticePoint, LatticePoint,         \
                                             const DomainRestriction&, const KernelBudget&);    \
  template std::vector<PassageValue> last_passage_row<Source>(                                 \
      const Source&, LatticePoint, std::int64_t, std::int64_t, std::int64_t,                   \
      const DomainRestriction&, const KernelBudget&);                                          \
  template PassageTable::PassageTable(const Source&, LatticePoint, LatticePoint,               \
                                      const DomainRestriction&, const KernelBudget&);

LPPKIT_INSTANTIATE(CoupledWeightField)
LPPKIT_INSTANTIATE(WeightWindow)

#undef LPPKIT_INSTANTIATE

}  // namespace lppkit
