#pragma once

// Coupled random environment for full-space and half-space exponential LPP.
//
// Two independent families are generated:
//   W(i,j), (i,j) in Z^2   i.i.d. Exp(1), read by both models off the diagonal
//   U(i),   i in Z         i.i.d. Exp(alpha), the half-space diagonal weights
// Every value is a pure function of (master seed, stream, site) computed with a
// Philox4x32-10 counter-based generator, so nothing is stored and evaluation
// order never matters.

#include <array>
#include <concepts>
#include <cstdint>
#include <vector>

#include "lppkit/lattice.hpp"

namespace lppkit {

namespace philox {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
Counter philox4x32_10(Counter ctr, Key key);

}  // namespace philox

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of replica `index` within logical stream `stream` of an experiment.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t index);

/// Maps 64 random bits to a double uniform in (0, 1]; zero is never produced.
double uniform_open_closed(std::uint64_t bits);

enum class WeightStream : std::uint32_t { Bulk = 0x57, Boundary = 0x55 };

class CoupledWeightField {
 public:
  CoupledWeightField(std::uint64_t master_seed, double alpha);

  std::uint64_t master_seed() const { return seed_; }
  double alpha() const { return alpha_; }

  /// W(i,j) ~ Exp(1).
  double bulk(std::int64_t i, std::int64_t j) const;
  /// U(i,i) ~ Exp(alpha).
  double boundary(std::int64_t i) const;

  double weight_full(LatticePoint p) const { return bulk(p.i, p.j); }
  /// U on the diagonal, W elsewhere in the half plane. Throws OutsideHalfPlane for i < j.
  double weight_half(LatticePoint p) const;

 private:
  std::uint64_t seed_;
  double alpha_;
  philox::Key bulk_key_;
  philox::Key boundary_key_;
};

/// Anything that can serve W and U to the DP kernels.
template <class S>
concept WeightSource = requires(const S& s, std::int64_t i, std::int64_t j) {
  { s.bulk(i, j) } -> std::convertible_to<double>;
  { s.boundary(i) } -> std::convertible_to<double>;
};

/// A materialized rectangle of the environment. Used by the kernels when many
/// queries share one region, and by tests that need hand-built weights.
class WeightWindow {
 public:
  /// Window filled with a constant; diagonal values default to the same constant.
  WeightWindow(LatticeRect rect, double fill);
  /// Window read out of a coupled field.
  WeightWindow(const CoupledWeightField& field, LatticeRect rect);

  const LatticeRect& rect() const { return rect_; }

  double bulk(std::int64_t i, std::int64_t j) const {
    return bulk_[static_cast<std::size_t>((j - rect_.j0) * rect_.width() + (i - rect_.i0))];
  }
  double boundary(std::int64_t i) const {
    return boundary_[static_cast<std::size_t>(i - diag_lo_)];
  }
  bool has_boundary(std::int64_t i) const { return i >= diag_lo_ && i <= diag_hi_; }

  void set_bulk(LatticePoint p, double w);
  void set_boundary(std::int64_t i, double u);
  /// Overwrites every diagonal value U(i) in the window.
  void fill_boundary(double u);

 private:
  LatticeRect rect_;
  std::int64_t diag_lo_ = 0, diag_hi_ = -1;
  std::vector<double> bulk_;
  std::vector<double> boundary_;
  void init_diagonal_range();
};

static_assert(WeightSource<CoupledWeightField>);
static_assert(WeightSource<WeightWindow>);

}  // namespace lppkit
