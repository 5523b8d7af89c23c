#pragma once

// Coupled half-space / full-space experiment: barrier events between
// (x1,y1) and (x2,y2), agreement of the two scaled fields on a compact window,
// the grid sequence w_0 < ... < w_k and the proof-chain passage values.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lppkit/errors.hpp"
#include "lppkit/geodesics.hpp"
#include "lppkit/passage.hpp"
#include "lppkit/shape.hpp"
#include "lppkit/weights.hpp"

namespace lppkit {

struct WindowPoint {
  double x = 0.0, s = 0.0, y = 0.0, t = 0.0;
};

/// Finite grid of (x, s; y, t) with s < t inside [-M, M]^4.
struct CompactWindow {
  double M = 1.0;
  double h = 0.25;
  /// Bound on |x| and |y|; at most M.
  double space_extent = 1.0;
  std::vector<WindowPoint> points;

  /// Grid step h: s, t over [-M, M], x, y over [-X, X] with X = space_extent.
  static CompactWindow uniform(double M, double h, double space_extent);
  static CompactWindow uniform(double M, double h) { return uniform(M, h, M); }

  /// Largest X (a multiple of h, at most M) with 2^(5/3) n^(2/3) X < (1 - ell) n^(2/3+delta),
  /// which keeps every window lattice point to the right of the line through the
  /// barrier endpoints. Evaluated at `p.n`.
  static double admissible_extent(const ShapeParams& p, double h);
  static CompactWindow for_params(const ShapeParams& p, double h = 0.25);
};

/// Lattice endpoints of a window point (the half and full shifted variants agree).
LatticeEndpoints window_endpoints(const WindowPoint& w, const ShapeParams& p);

/// Empty when every window lattice point lies strictly below the diagonal and
/// inside the rows of the barrier; otherwise the reason.
std::optional<std::string> window_inadmissible(const CompactWindow& w, const ShapeParams& p);

/// Rectangle of sites read by a coupled instance.
LatticeRect coupled_region(const ShapeParams& p, const CompactWindow& w);

struct BarrierGeodesics {
  Geodesic rightmost;
  Geodesic leftmost;
  bool touches_rightmost = false;
  bool touches_leftmost = false;
  /// Leftmost and rightmost maximizers differ.
  bool ambiguous = false;
  /// A(O), counted as true under ambiguity.
  bool event = false;
};

struct BarrierOutcome {
  BarrierGeodesics half;
  BarrierGeodesics full;
  bool event_H() const { return half.event; }
  bool event_Z2() const { return full.event; }

  /// Raw passage values per window point.
  std::vector<double> value_half;
  std::vector<double> value_full;
  /// Bit-exact agreement per window point.
  std::vector<bool> agreement;
  std::size_t disagreements = 0;
  bool all_agree() const { return disagreements == 0; }

  /// Every window start and end lies weakly right of Leftmost_j of the barrier
  /// rightmost geodesic, in both geometries.
  bool sandwiched = false;
  /// Every window rightmost geodesic, half and full, avoids the diagonal.
  bool window_avoids = false;
  /// No barrier geodesic touches the diagonal.
  bool barrier_avoids() const {
    return !half.touches_rightmost && !half.touches_leftmost && !full.touches_rightmost &&
           !full.touches_leftmost;
  }

  /// Both events false and sandwiched imply agreement.
  bool barrier_implication_holds() const {
    return !((!event_H() && !event_Z2() && sandwiched) && !all_agree());
  }
  /// All extracted geodesics avoid the diagonal imply agreement.
  bool geodesic_implication_holds() const {
    return !(barrier_avoids() && window_avoids && !all_agree());
  }
};

/// One coupled realization on explicit weights. Throws std::invalid_argument
/// for an inadmissible window and propagates kernel budget errors.
BarrierOutcome run_coupled_instance(const WeightWindow& weights, const ShapeParams& p,
                                    const CompactWindow& window, const KernelBudget& budget = {});

BarrierOutcome run_coupled_instance(std::uint64_t seed, double alpha, const ShapeParams& p,
                                    const CompactWindow& window, const KernelBudget& budget = {});

struct AgreementRow {
  std::int64_t n = 0;
  std::size_t replicas = 0;  ///< replicas that completed
  std::size_t errors = 0;    ///< replicas excluded after a kernel error
  std::size_t disagree = 0;
  std::size_t event_H = 0;
  std::size_t event_Z2 = 0;
  std::size_t unsandwiched = 0;
  std::size_t implication_exceptions = 0;
  double p_hat = 0.0;
  double std_error = 0.0;
  double p_A_H = 0.0;
  double p_A_Z2 = 0.0;
};

struct AgreementTrend {
  /// Weighted least-squares slope of p_hat against log n and its standard error.
  double slope = 0.0;
  double slope_stderr = 0.0;
  /// (p_first - p_last) / sqrt(se_first^2 + se_last^2).
  double z_first_last = 0.0;
  /// No increase between consecutive n beyond two combined standard errors.
  bool decreasing_within_noise = true;
};

struct AgreementEstimate {
  std::vector<AgreementRow> rows;
  AgreementTrend trend;
};

struct AgreementConfig {
  std::uint64_t master_seed = 1;
  double alpha = 0.5;
  std::size_t replicas = 100;
  unsigned threads = 1;
  double h = 0.25;
  /// Window shared across the sweep; defaults to CompactWindow::for_params at the smallest n.
  std::optional<CompactWindow> window;
  KernelBudget budget{};
};

/// Replica k at sweep point n uses seed derive_seed(master_seed, n, k).
std::uint64_t replica_seed(std::uint64_t master_seed, std::int64_t n, std::size_t k);

/// Per-replica result; `error` is set when the replica failed.
struct ReplicaRecord {
  std::int64_t n = 0;
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::optional<BarrierOutcome> outcome;
  ReplicaError error_code = ReplicaError::None;
  std::string error;
};

AgreementEstimate estimate_agreement_probability(const std::vector<ShapeParams>& sweep,
                                                 const AgreementConfig& cfg,
                                                 std::vector<ReplicaRecord>* records = nullptr);

AgreementTrend agreement_trend(const std::vector<AgreementRow>& rows);

struct GridSequence {
  std::vector<std::int64_t> w;
  std::int64_t m0 = 8;
  std::int64_t k() const { return static_cast<std::int64_t>(w.size()) - 1; }
};

/// Uniform interior spacing floor(n^(1/3)) with the last gaps rebalanced to
/// stay within [m0, n^(1/3)]. Throws std::invalid_argument when infeasible.
GridSequence build_grid_sequence(const ShapeParams& p, std::int64_t m0 = 8);

/// Empty when all anchors and spacing bounds hold, otherwise the first failure.
std::optional<std::string> grid_sequence_violation(const GridSequence& g, const ShapeParams& p);

struct ProofChainValues {
  double L_ij = 0.0;
  double LR_ij = 0.0;
  /// Components of L_ij: full head, half middle, full tail.
  double full_head = 0.0, half_middle = 0.0, full_tail = 0.0;
  /// Components of LR_ij with the diagonal-pinned heads and tails.
  double pinned_head = 0.0, pinned_tail = 0.0;
};

/// L^half|_full(p; (w,w)): paths in the half plane meeting the diagonal only at (w,w),
/// (w,w) excluded.
template <WeightSource S>
PassageValue pinned_to_diagonal(const S& src, LatticePoint p, std::int64_t w,
                                const KernelBudget& budget = {});

/// L^half|_full((w,w); q): paths meeting the diagonal only at (w,w), with both
/// (w,w) and q excluded. Equals the off-diagonal passage value from (w+1, w).
template <WeightSource S>
PassageValue pinned_from_diagonal(const S& src, std::int64_t w, LatticePoint q,
                                  const KernelBudget& budget = {});

template <WeightSource S>
ProofChainValues proof_chain_values(const S& src, const ShapeParams& p, const GridSequence& g,
                                    std::int64_t i, std::int64_t j, const KernelBudget& budget = {});

struct BracketCheck {
  bool touched = false;
  std::int64_t touch = 0;    ///< first diagonal site (t, t) of the geodesic
  std::int64_t bracket = 0;  ///< index with w_bracket <= t < w_{bracket+1}
  double lhs = 0.0;          ///< L^full(x1,y1; x2,y2)
  double rhs = 0.0;          ///< L^full(x1,y1; w_{b+1},w_{b+1}) + L^full(w_b,w_b; x2,y2)
  bool holds = true;
};

/// Bracketing step on a full-plane barrier geodesic: every diagonal contact t
/// gives lhs <= rhs. Checks each contact and reports the first failure or the
/// first contact.
template <WeightSource S>
BracketCheck bracket_chain_check(const S& src, const ShapeParams& p, const GridSequence& g,
                                 const Geodesic& full_barrier, const KernelBudget& budget = {});

// One-point tails.

enum class TailModel { Full, Half, Cylinder };

struct TailGeometry {
  TailModel model = TailModel::Half;
  /// Full: L(0,0; m, m2). Half: L((1,1); (m, m)). Cylinder: anchor (1,1), xi_n = m.
  std::int64_t m = 100;
  std::int64_t m2 = 100;
  /// Cylinder half-width is 2 gamma n^(2/3) with n = cylinder_n.
  double gamma = 1.0;
  std::int64_t cylinder_n = 100;
  double alpha = 0.5;
};

/// (sqrt m + sqrt m2)^2, 4m or 4 xi_n.
double tail_center(const TailGeometry& g);
/// Fluctuation unit: m2^(1/3), m^(1/3) or cylinder_n^(1/3).
double tail_unit(const TailGeometry& g);

/// Replica k draws its field from derive_seed(master_seed, (model << 48) ^ m, k).
std::uint64_t tail_seed(const TailGeometry& g, std::uint64_t master_seed, std::size_t k);

/// The raw passage value of one replica.
double sample_tail_value(const TailGeometry& g, std::uint64_t seed);

struct TailRow {
  double r = 0.0;
  double upper = 0.0;  ///< frequency of value - center >= r * unit
  double lower = 0.0;  ///< frequency of value - center <= -r * unit
};

std::vector<double> sample_tail_values(const TailGeometry& g, std::uint64_t master_seed,
                                       std::size_t replicas, unsigned threads);

std::vector<TailRow> empirical_tail(const TailGeometry& g, const std::vector<double>& r_grid,
                                    std::size_t replicas, std::uint64_t master_seed,
                                    unsigned threads);

}  // namespace lppkit
