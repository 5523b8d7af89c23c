#pragma once

// Last passage values in the full plane, the half plane {i >= j} and the
// diagonal cylinder. Convention: the start weight is counted, the end weight
// is not, and L(p; q) = 0 when p does not precede q.

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "lppkit/lattice.hpp"
#include "lppkit/weights.hpp"

namespace lppkit {

enum class DomainKind { FullPlane, HalfPlane, Cylinder };

/// Cylinder of the given length and half-width around the diagonal line
/// through `anchor`: members satisfy
///   w+z <= x+y <= w+z+2*xi_n  and  |(-x+y) - (z-w)| <= halfwidth.
struct CylinderSpec {
  LatticePoint anchor;
  std::int64_t xi_n = 0;
  double halfwidth = 0.0;

  LatticePoint end() const { return {anchor.i + xi_n, anchor.j + xi_n}; }
  bool contains(LatticePoint p) const;
};

class DomainRestriction {
 public:
  static DomainRestriction full_plane();
  static DomainRestriction half_plane();
  /// Half plane with every diagonal site removed except the query endpoints.
  /// Realizes the pinned variants L^half|_full, whose paths meet the diagonal
  /// only at a prescribed endpoint.
  static DomainRestriction half_plane_off_diagonal();
  static DomainRestriction cylinder(LatticePoint anchor, std::int64_t xi_n, double halfwidth);

  DomainKind kind() const { return kind_; }
  bool off_diagonal() const { return off_diagonal_; }
  const CylinderSpec& cylinder_spec() const { return cylinder_; }

  /// True when the half-space reads U on the diagonal.
  bool uses_boundary_weights() const { return kind_ == DomainKind::HalfPlane; }

  /// Membership of a site, not counting endpoint pins.
  bool contains(LatticePoint p) const;

  /// Inclusive column interval [lo, hi] of members in row j, clipped to [clip_lo, clip_hi].
  /// Empty when lo > hi.
  void row_span(std::int64_t j, std::int64_t clip_lo, std::int64_t clip_hi, std::int64_t& lo,
                std::int64_t& hi) const;

  friend bool operator==(const DomainRestriction& a, const DomainRestriction& b) {
    return a.kind_ == b.kind_ && a.off_diagonal_ == b.off_diagonal_ &&
           a.cylinder_.anchor == b.cylinder_.anchor && a.cylinder_.xi_n == b.cylinder_.xi_n &&
           a.cylinder_.halfwidth == b.cylinder_.halfwidth;
  }

 private:
  DomainKind kind_ = DomainKind::FullPlane;
  bool off_diagonal_ = false;
  CylinderSpec cylinder_{};
};

enum class PassageStatus {
  Ok,
  Unordered,         ///< start does not precede end; value is 0 by definition
  NoAdmissiblePath,  ///< endpoints ordered but no path stays inside the domain
};

struct PassageQuery {
  LatticePoint start;
  LatticePoint end;
  DomainRestriction restriction;
};

struct PassageValue {
  double value = 0.0;
  PassageStatus status = PassageStatus::Ok;
  PassageQuery query;

  bool ok() const { return status == PassageStatus::Ok; }
};

struct KernelBudget {
  /// Cells swept by a value-only query (time bound).
  std::int64_t max_cells = std::int64_t{1} << 34;
  /// Cells stored by a table query (memory bound, 8 bytes each).
  std::int64_t max_table_cells = std::int64_t{1} << 26;
};

class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(std::int64_t cells, std::int64_t limit)
      : std::runtime_error("DP window of " + std::to_string(cells) +
                           " cells exceeds the budget of " + std::to_string(limit)) {}
};

inline constexpr double kUnreachable = -std::numeric_limits<double>::infinity();

/// Weight read at a site by a model with the given restriction.
template <WeightSource S>
inline double site_weight(const S& src, const DomainRestriction& r, std::int64_t i,
                          std::int64_t j) {
  return (r.uses_boundary_weights() && i == j) ? src.boundary(i) : src.bulk(i, j);
}

/// Value-only query with a rolling two-row DP.
template <WeightSource S>
PassageValue last_passage(const S& src, LatticePoint start, LatticePoint end,
                          const DomainRestriction& restriction, const KernelBudget& budget = {});

/// One DP sweep from `start` serving every endpoint (c, end_row), c in [col_first, col_last].
/// Element k is bit-identical to last_passage(start, (col_first + k, end_row)).
template <WeightSource S>
std::vector<PassageValue> last_passage_row(const S& src, LatticePoint start, std::int64_t end_row,
                                           std::int64_t col_first, std::int64_t col_last,
                                           const DomainRestriction& restriction,
                                           const KernelBudget& budget = {});

template <WeightSource S>
PassageValue lpp_full(const S& src, LatticePoint start, LatticePoint end,
                      const KernelBudget& budget = {}) {
  return last_passage(src, start, end, DomainRestriction::full_plane(), budget);
}

template <WeightSource S>
PassageValue lpp_half(const S& src, LatticePoint start, LatticePoint end,
                      const KernelBudget& budget = {}) {
  return last_passage(src, start, end, DomainRestriction::half_plane(), budget);
}

/// Passage value from `anchor` to anchor + (xi_n, xi_n) inside the cylinder.
template <WeightSource S>
PassageValue lpp_cylinder(const S& src, LatticePoint anchor, std::int64_t xi_n, double halfwidth,
                          const KernelBudget& budget = {}) {
  const auto r = DomainRestriction::cylinder(anchor, xi_n, halfwidth);
  return last_passage(src, anchor, r.cylinder_spec().end(), r, budget);
}

template <WeightSource S>
std::vector<PassageValue> lpp_row_profile(const S& src, LatticePoint start, std::int64_t end_row,
                                          std::int64_t col_first, std::int64_t col_last,
                                          const DomainRestriction& restriction,
                                          const KernelBudget& budget = {}) {
  return last_passage_row(src, start, end_row, col_first, col_last, restriction, budget);
}

/// Stored DP table over the rectangle [start, corner]. Serves values and
/// geodesic backtracks for every endpoint in the rectangle. Entries hold the
/// endpoint-inclusive sums G; unreachable cells hold -inf.
class PassageTable {
 public:
  template <WeightSource S>
  PassageTable(const S& src, LatticePoint start, LatticePoint corner,
               const DomainRestriction& restriction, const KernelBudget& budget = {});

  LatticePoint start() const { return start_; }
  LatticePoint corner() const { return corner_; }
  const DomainRestriction& restriction() const { return restriction_; }

  /// Endpoint-inclusive DP entry, -inf when p is outside the table or unreachable.
  double inclusive(LatticePoint p) const {
    if (p.i < start_.i || p.j < start_.j || p.i > corner_.i || p.j > corner_.j) return kUnreachable;
    return g_[index(p)];
  }

  PassageValue value(LatticePoint end) const;

  enum class Tie { Rightmost, Leftmost };
  /// Sites of a maximizing path from start to end, ties broken per `tie`.
  /// Throws std::domain_error when no admissible path exists.
  std::vector<LatticePoint> backtrack(LatticePoint end, Tie tie) const;

 private:
  LatticePoint start_, corner_;
  DomainRestriction restriction_;
  std::int64_t width_ = 0;
  std::vector<double> g_;

  std::size_t index(LatticePoint p) const {
    return static_cast<std::size_t>((p.j - start_.j) * width_ + (p.i - start_.i));
  }
  void check_endpoint(LatticePoint end) const;
};

}  // namespace lppkit
