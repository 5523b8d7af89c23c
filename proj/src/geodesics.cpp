#include "lppkit/geodesics.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace lppkit {

Geodesic geodesic_from_table(const PassageTable& table, LatticePoint end, Selection selection) {
  Geodesic g;
  g.selection = selection;
  g.restriction = table.restriction();
  g.sites = table.backtrack(end, selection == Selection::Rightmost ? PassageTable::Tie::Rightmost
                                                                   : PassageTable::Tie::Leftmost);
  g.value = table.value(end).value;
  return g;
}

namespace {

template <WeightSource S>
Geodesic extract(const S& src, LatticePoint start, LatticePoint end,
                 const DomainRestriction& restriction, const KernelBudget& budget,
                 Selection selection) {
  if (!precedes(start, end)) {
    throw std::invalid_argument("geodesic endpoints " + to_string(start) + " and " +
                                to_string(end) + " are not ordered");
  }
  const PassageTable table(src, start, end, restriction, budget);
  return geodesic_from_table(table, end, selection);
}

}  // namespace

template <WeightSource S>
Geodesic rightmost_geodesic(const S& src, LatticePoint start, LatticePoint end,
                            const DomainRestriction& restriction, const KernelBudget& budget) {
  return extract(src, start, end, restriction, budget, Selection::Rightmost);
}

template <WeightSource S>
Geodesic leftmost_geodesic(const S& src, LatticePoint start, LatticePoint end,
                           const DomainRestriction& restriction, const KernelBudget& budget) {
  return extract(src, start, end, restriction, budget, Selection::Leftmost);
}

template <WeightSource S>
double path_weight_sum(const S& src, const Geodesic& g) {
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < g.sites.size(); ++k) {
    sum += site_weight(src, g.restriction, g.sites[k].i, g.sites[k].j);
  }
  return sum;
}

LevelProfile leftmost_profile(const Geodesic& g) {
  LevelProfile p;
  if (g.sites.empty()) return p;
  p.first_level = g.sites.front().j;
  p.columns.assign(static_cast<std::size_t>(g.sites.back().j - p.first_level + 1),
                   LevelProfile::kAbsent);
  for (const LatticePoint& s : g.sites) {
    auto& c = p.columns[static_cast<std::size_t>(s.j - p.first_level)];
    if (c == LevelProfile::kAbsent || s.i < c) c = s.i;
  }
  return p;
}

MonotonicityWitness compare_profiles(const LevelProfile& lower, const LevelProfile& upper) {
  const std::int64_t lo = std::max(lower.first_level, upper.first_level);
  const std::int64_t hi =
      std::min(lower.first_level + static_cast<std::int64_t>(lower.columns.size()),
               upper.first_level + static_cast<std::int64_t>(upper.columns.size()));
  for (std::int64_t j = lo; j < hi; ++j) {
    const std::int64_t a = lower.at(j);
    const std::int64_t b = upper.at(j);
    if (a == LevelProfile::kAbsent || b == LevelProfile::kAbsent) continue;
    if (a > b) return {false, j};
  }
  return {};
}

template <WeightSource S>
MonotonicityWitness check_monotonicity(const S& src, std::int64_t y, std::int64_t z,
                                       std::int64_t x1, std::int64_t w1, std::int64_t x2,
                                       std::int64_t w2, const DomainRestriction& restriction,
                                       const KernelBudget& budget) {
  if (x1 > x2 || w1 > w2) throw std::invalid_argument("monotonicity check needs x1 <= x2, w1 <= w2");
  const Geodesic g1 = rightmost_geodesic(src, {x1, y}, {w1, z}, restriction, budget);
  const Geodesic g2 = rightmost_geodesic(src, {x2, y}, {w2, z}, restriction, budget);
  return compare_profiles(leftmost_profile(g1), leftmost_profile(g2));
}

bool touches_diagonal(const Geodesic& g) {
  return std::any_of(g.sites.begin(), g.sites.end(), on_diagonal);
}

void write_geodesic_csv(std::ostream& os, const Geodesic& g) {
  os << "i,j\n";
  for (const LatticePoint& s : g.sites) os << s.i << ',' << s.j << '\n';
}

#define LPPKIT_INSTANTIATE(Source)                                                         \
  template Geodesic rightmost_geodesic<Source>(const Source&, LatticePoint, LatticePoint,  \
                                               const DomainRestriction&,                   \
                                               const KernelBudget&);                       \
  template Geodesic leftmost_geodesic<Source>(const Source&, LatticePoint, LatticePoint,   \
                                              const DomainRestriction&,                    \
                                              const KernelBudget&);                        \
  template double path_weight_sum<Source>(const Source&, const Geodesic&);                 \
  template MonotonicityWitness check_monotonicity<Source>(                                 \
      const Source&, std::int64_t, std::int64_t, std::int64_t, std::int64_t, std::int64_t, \
      std::int64_t, const DomainRestriction&, const KernelBudget&);

LPPKIT_INSTANTIATE(CoupledWeightField)
LPPKIT_INSTANTIATE(WeightWindow)

#undef LPPKIT_INSTANTIATE

}  // namespace lppkit
