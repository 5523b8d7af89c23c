#include <doctest.h>

#include <cmath>

#include "lppkit/coupling.hpp"
#include "lppkit/stats.hpp"
#include "oracles.hpp"

using namespace lppkit;

namespace {

ShapeParams agreement_params(std::int64_t n) { return ShapeParams{n, 0.3, 1, 0.5, 1.0}; }

}  // namespace

TEST_CASE("admissible window extent") {
  const ShapeParams p = agreement_params(50);
  CHECK(CompactWindow::admissible_extent(p, 0.25) == 0.5);
  const CompactWindow w = CompactWindow::for_params(p);
  CHECK_FALSE(window_inadmissible(w, p));
  CHECK_FALSE(window_inadmissible(w, agreement_params(400)));
  CHECK(window_inadmissible(CompactWindow::uniform(1.0, 0.25), p));
  // 9 (s, t) values give 36 ordered pairs, times 5 x 5 spatial points.
  CHECK(w.points.size() == 36 * 25);
  CHECK_THROWS_AS(CompactWindow::uniform(1.0, 0.25, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(run_coupled_instance(1, 0.5, p, CompactWindow::uniform(1.0, 0.25)), std::invalid_argument);
}

TEST_CASE("heavy diagonal forces both barrier events") {
  const ShapeParams p = agreement_params(50);
  const CompactWindow win = CompactWindow::for_params(p);
  const CoupledWeightField f(3, 0.5);
  WeightWindow w(f, coupled_region(p, win));
  for (std::int64_t i = w.rect().i0; i <= w.rect().i1; ++i) {
    if (!w.has_boundary(i)) continue;
    w.set_boundary(i, 1e9);
    w.set_bulk({i, i}, 1e9);
  }
  const BarrierOutcome o = run_coupled_instance(w, p, win);
  CHECK(o.event_H());
  CHECK(o.event_Z2());
  CHECK(o.half.touches_rightmost);
  CHECK(o.full.touches_rightmost);
  CHECK_FALSE(o.barrier_avoids());
  CHECK(o.barrier_implication_holds());
  CHECK(o.geodesic_implication_holds());
}

TEST_CASE("avoiding the diagonal implies agreement") {
  const ShapeParams p = agreement_params(50);
  const CompactWindow win = CompactWindow::for_params(p);
  int avoiding = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const BarrierOutcome o = run_coupled_instance(seed, 0.5, p, win);
    CHECK(o.agreement.size() == win.points.size());
    CHECK(o.geodesic_implication_holds());
    CHECK(o.barrier_implication_holds());
    if (o.barrier_avoids() && o.window_avoids) {
      ++avoiding;
      for (std::size_t k = 0; k < o.value_half.size(); ++k) CHECK(o.value_half[k] == o.value_full[k]);
    }
    if (!o.all_agree()) CHECK_FALSE((o.barrier_avoids() && o.window_avoids));
  }
  CHECK(avoiding > 0);
}

TEST_CASE("agreement estimate is thread invariant and reports binomial errors") {
  const std::vector<ShapeParams> sweep{agreement_params(50), agreement_params(60)};
  AgreementConfig c;
  c.replicas = 40;
  c.master_seed = 11;
  std::vector<ReplicaRecord> r1, r3;
  const AgreementEstimate a = estimate_agreement_probability(sweep, c, &r1);
  c.threads = 3;
  const AgreementEstimate b = estimate_agreement_probability(sweep, c, &r3);
  REQUIRE(a.rows.size() == 2);
  REQUIRE(r1.size() == 80);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(a.rows[k].disagree == b.rows[k].disagree);
    CHECK(a.rows[k].event_H == b.rows[k].event_H);
    CHECK(a.rows[k].p_hat == b.rows[k].p_hat);
    const double ph = a.rows[k].p_hat;
    CHECK(a.rows[k].std_error == doctest::Approx(std::sqrt(ph * (1 - ph) / 40)).epsilon(1e-14));
    // A disagreement needs an event or an unsandwiched window.
    CHECK(a.rows[k].p_hat <= a.rows[k].p_A_H + a.rows[k].p_A_Z2 +
                                 static_cast<double>(a.rows[k].unsandwiched) / 40 + 1e-15);
  }
  for (std::size_t k = 0; k < r1.size(); ++k) {
    CHECK(r1[k].seed == replica_seed(11, r1[k].n, r1[k].index));
    REQUIRE(r1[k].outcome);
    CHECK(r1[k].outcome->agreement == r3[k].outcome->agreement);
  }
}

TEST_CASE("failed replicas are excluded with an error code") {
  AgreementConfig c;
  c.replicas = 5;
  c.budget.max_table_cells = 100;
  std::vector<ReplicaRecord> recs;
  const AgreementEstimate e = estimate_agreement_probability({agreement_params(50)}, c, &recs);
  CHECK(e.rows[0].errors == 5);
  CHECK(e.rows[0].replicas == 0);
  for (const ReplicaRecord& r : recs) {
    CHECK(r.error_code == ReplicaError::BudgetExceeded);
    CHECK_FALSE(r.outcome);
  }
}

TEST_CASE("agreement trend") {
  std::vector<AgreementRow> rows(3);
  const double p[] = {0.6, 0.4, 0.2};
  for (int k = 0; k < 3; ++k) {
    rows[k].n = 50 << k;
    rows[k].replicas = 1000;
    rows[k].p_hat = p[k];
    rows[k].std_error = binomial_stderr(p[k], 1000);
  }
  const AgreementTrend t = agreement_trend(rows);
  CHECK(t.slope < 0);
  CHECK(t.slope_stderr > 0);
  CHECK(t.decreasing_within_noise);
  CHECK(t.z_first_last == doctest::Approx(0.4 / std::hypot(rows[0].std_error, rows[2].std_error)));
  rows[1].p_hat = 0.9;
  CHECK_FALSE(agreement_trend(rows).decreasing_within_noise);
}

TEST_CASE("grid sequence at n = 1e6") {
  const ShapeParams p{1000000, 0.1, 1, 0.5, 1.0};
  const GridSequence g = build_grid_sequence(p);
  CHECK_FALSE(grid_sequence_violation(g, p));
  CHECK(g.w.front() == p.interval_lo());
  CHECK(g.w.back() == 1000000);
  const std::int64_t span = p.interval_hi() - p.interval_lo();
  CHECK(std::abs(g.k() - span / 100) <= 2);
  // Uniform spacing apart from the rebalanced gaps before w_{k-1}.
  int uniform = 0;
  for (std::size_t k = 0; k + 1 < g.w.size(); ++k) uniform += g.w[k + 1] - g.w[k] == 100;
  CHECK(uniform >= g.k() - 4);
  GridSequence bad = g;
  bad.w[3] += 1;
  CHECK(grid_sequence_violation(bad, p));
  CHECK_THROWS_AS(build_grid_sequence(ShapeParams{100, 0.1, 1, 0.5, 1.0}), std::invalid_argument);
}

TEST_CASE("grid sequence rebalances a short final gap") {
  for (std::int64_t n : {1000, 1331, 5000, 12345, 99999, 1000003}) {
    const ShapeParams p{n, 0.2, 1, 0.4, 1.0};
    const GridSequence g = build_grid_sequence(p);
    CHECK_FALSE(grid_sequence_violation(g, p));
  }
}

TEST_CASE("pinned passage values match constrained enumeration") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const CoupledWeightField f(seed, 0.5);
    const oracle::Weight wt = [&f](std::int64_t i, std::int64_t j) { return i == j ? f.boundary(i) : f.bulk(i, j); };
    const LatticePoint p{2, -4};
    const auto to = oracle::enumerate_paths(wt, p, {4, 4}, [](LatticePoint q) {
      return q.i > q.j || q == LatticePoint{4, 4};
    });
    CHECK(pinned_to_diagonal(f, p, 4).value == to.value({4, 4}));

    const LatticePoint q{7, 3};
    const auto from = oracle::enumerate_paths(wt, {2, 1}, q, [](LatticePoint s) { return s.i > s.j; });
    CHECK(pinned_from_diagonal(f, 1, q).value == from.value(q));
    CHECK(pinned_from_diagonal(f, 1, {1, 1}).value == 0.0);
    CHECK_THROWS_AS(pinned_from_diagonal(f, 1, {3, 3}), std::invalid_argument);
  }
}

TEST_CASE("proof chain values and the bracketing step") {
  const ShapeParams p{1000, 0.1, 1, 0.5, 1.0};
  const GridSequence g = build_grid_sequence(p);
  REQUIRE(g.k() >= 4);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const CoupledWeightField f(seed, 0.5);
    for (auto [i, j] : {std::pair<std::int64_t, std::int64_t>{0, 0}, {1, 3}, {0, g.k() - 1}}) {
      const ProofChainValues v = proof_chain_values(f, p, g, i, j);
      CHECK(v.L_ij >= v.LR_ij);
      CHECK(v.full_head >= v.pinned_head);
      CHECK(v.full_tail >= v.pinned_tail);
    }
    CHECK_THROWS_AS(proof_chain_values(f, p, g, 2, 1), std::out_of_range);

    WeightWindow w(f, LatticeRect::spanning(p.barrier_start(), p.barrier_end()));
    for (std::int64_t t = w.rect().i0; t <= w.rect().i1; ++t) {
      if (w.has_boundary(t)) w.set_bulk({t, t}, 5.0);
    }
    const Geodesic geo = rightmost_geodesic(w, p.barrier_start(), p.barrier_end(), DomainRestriction::full_plane());
    const BracketCheck b = bracket_chain_check(w, p, g, geo);
    CHECK(b.touched);
    CHECK(b.holds);
    CHECK(g.w[static_cast<std::size_t>(b.bracket)] <= b.touch);
  }
}

TEST_CASE("one-point tails") {
  const TailGeometry g{TailModel::Half, 60, 60, 1.0, 60, 0.5};
  const std::vector<double> grid{0, 0.5, 1, 1.5, 2, 3};
  const std::vector<TailRow> rows = empirical_tail(g, grid, 400, 5, 1);
  REQUIRE(rows.size() == grid.size());
  CHECK(rows[0].upper + rows[0].lower >= 1.0);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(rows[k].upper <= rows[k - 1].upper);
    CHECK(rows[k].lower <= rows[k - 1].lower);
  }
  CHECK(tail_center(g) == 240.0);
  CHECK(tail_unit(g) == doctest::Approx(std::cbrt(60.0)));
  const TailGeometry full{TailModel::Full, 16, 9, 1.0, 1, 0.5};
  CHECK(tail_center(full) == 49.0);
  CHECK(sample_tail_values(g, 5, 30, 1) == sample_tail_values(g, 5, 30, 3));
  CHECK(sample_tail_value(full, 1) == lpp_full(CoupledWeightField(1, 0.5), {0, 0}, {16, 9}).value);
  const TailGeometry cyl{TailModel::Cylinder, 30, 30, 1.0, 30, 0.5};
  const double hw = 2.0 * static_cast<double>(n_two_thirds(30));
  CHECK(sample_tail_value(cyl, 2) == lpp_cylinder(CoupledWeightField(2, 0.5), {1, 1}, 29, hw).value);
  CHECK(tail_seed(g, 5, 3) != tail_seed(full, 5, 3));
}
