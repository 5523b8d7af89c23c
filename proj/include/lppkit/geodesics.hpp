#pragma once

// Maximizing paths, the per-level Leftmost functional and the rightmost-path
// monotonicity check.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "lppkit/passage.hpp"

namespace lppkit {

enum class Selection { Rightmost, Leftmost };

struct Geodesic {
  std::vector<LatticePoint> sites;  ///< start first, end last, unit up-right steps
  Selection selection = Selection::Rightmost;
  double value = 0.0;
  DomainRestriction restriction;

  LatticePoint start() const { return sites.front(); }
  LatticePoint end() const { return sites.back(); }
};

/// Geodesic to `end` read out of an existing table.
Geodesic geodesic_from_table(const PassageTable& table, LatticePoint end, Selection selection);

/// Throws std::domain_error when no admissible path exists and BudgetExceeded
/// when the stored table would not fit.
template <WeightSource S>
Geodesic rightmost_geodesic(const S& src, LatticePoint start, LatticePoint end,
                            const DomainRestriction& restriction, const KernelBudget& budget = {});

template <WeightSource S>
Geodesic leftmost_geodesic(const S& src, LatticePoint start, LatticePoint end,
                           const DomainRestriction& restriction, const KernelBudget& budget = {});

/// Weight sum over every site but the last, accumulated in path order.
template <WeightSource S>
double path_weight_sum(const S& src, const Geodesic& g);

/// Leftmost_j for every level j, stored densely from `first_level`.
struct LevelProfile {
  static constexpr std::int64_t kAbsent = std::numeric_limits<std::int64_t>::min();

  std::int64_t first_level = 0;
  std::vector<std::int64_t> columns;

  std::int64_t at(std::int64_t level) const {
    if (level < first_level || level >= first_level + static_cast<std::int64_t>(columns.size())) {
      return kAbsent;
    }
    return columns[static_cast<std::size_t>(level - first_level)];
  }
  bool visits(std::int64_t level) const { return at(level) != kAbsent; }
};

LevelProfile leftmost_profile(const Geodesic& g);

struct MonotonicityWitness {
  bool holds = true;
  std::optional<std::int64_t> violating_level;

  explicit operator bool() const { return holds; }
};

/// Compares Leftmost_j of the rightmost geodesics (x1,y)->(w1,z) and
/// (x2,y)->(w2,z) on every level both visit.
template <WeightSource S>
MonotonicityWitness check_monotonicity(const S& src, std::int64_t y, std::int64_t z,
                                       std::int64_t x1, std::int64_t w1, std::int64_t x2,
                                       std::int64_t w2, const DomainRestriction& restriction,
                                       const KernelBudget& budget = {});

/// Per-level comparison of two already extracted paths.
MonotonicityWitness compare_profiles(const LevelProfile& lower, const LevelProfile& upper);

bool touches_diagonal(const Geodesic& g);

/// CSV with header "i,j", one row per site.
void write_geodesic_csv(std::ostream& os, const Geodesic& g);

}  // namespace lppkit
