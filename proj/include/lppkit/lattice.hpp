#pragma once

#include <cstdint>
#include <compare>
#include <stdexcept>
#include <string>

namespace lppkit {

/// A site of Z^2. `i` is the column (x-coordinate), `j` the row (y-coordinate).
struct LatticePoint {
  std::int64_t i = 0;
  std::int64_t j = 0;

  friend constexpr bool operator==(LatticePoint, LatticePoint) = default;
  friend constexpr auto operator<=>(LatticePoint, LatticePoint) = default;
};

/// Coordinatewise partial order: p precedes q iff p.i <= q.i and p.j <= q.j.
constexpr bool precedes(LatticePoint p, LatticePoint q) {
  return p.i <= q.i && p.j <= q.j;
}

constexpr bool in_half_plane(LatticePoint p) { return p.i >= p.j; }
constexpr bool on_diagonal(LatticePoint p) { return p.i == p.j; }

/// Axis-aligned inclusive rectangle of lattice sites.
struct LatticeRect {
  std::int64_t i0 = 0, j0 = 0, i1 = -1, j1 = -1;

  static constexpr LatticeRect spanning(LatticePoint a, LatticePoint b) {
    return {a.i < b.i ? a.i : b.i, a.j < b.j ? a.j : b.j,
            a.i < b.i ? b.i : a.i, a.j < b.j ? b.j : a.j};
  }
  constexpr bool empty() const { return i1 < i0 || j1 < j0; }
  constexpr std::int64_t width() const { return empty() ? 0 : i1 - i0 + 1; }
  constexpr std::int64_t height() const { return empty() ? 0 : j1 - j0 + 1; }
  constexpr std::int64_t cells() const { return width() * height(); }
  constexpr bool contains(LatticePoint p) const {
    return p.i >= i0 && p.i <= i1 && p.j >= j0 && p.j <= j1;
  }
  constexpr LatticeRect united(LatticeRect o) const {
    if (empty()) return o;
    if (o.empty()) return *this;
    return {i0 < o.i0 ? i0 : o.i0, j0 < o.j0 ? j0 : o.j0,
            i1 > o.i1 ? i1 : o.i1, j1 > o.j1 ? j1 : o.j1};
  }
  constexpr LatticeRect united(LatticePoint p) const {
    return united(LatticeRect{p.i, p.j, p.i, p.j});
  }
};

std::string to_string(LatticePoint p);

/// Raised when a query names a site outside the half plane {i >= j}.
class OutsideHalfPlane : public std::invalid_argument {
 public:
  explicit OutsideHalfPlane(LatticePoint p)
      : std::invalid_argument("site " + to_string(p) + " is outside the half plane i >= j") {}
};

}  // namespace lppkit
