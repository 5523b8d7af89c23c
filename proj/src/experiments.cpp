#include "lppkit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <optional>
#include <stdexcept>

#include "lppkit/coupling.hpp"
#include "lppkit/errors.hpp"
#include "lppkit/geodesics.hpp"
#include "lppkit/parallel.hpp"
#include "lppkit/pfaffian.hpp"
#include "lppkit/shape.hpp"
#include "lppkit/stats.hpp"

namespace lppkit {

namespace {

std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ShapeParams params_at(const ExperimentManifest& m, std::int64_t n) {
  return ShapeParams{n, m.delta, m.M, m.ell, m.gamma};
}

int code(ReplicaError e) { return static_cast<int>(e); }

Json window_json(const CompactWindow& w) {
  return {{"M", w.M}, {"h", w.h}, {"space_extent", w.space_extent}, {"points", w.points.size()}};
}

CompactWindow agreement_window(const ExperimentManifest& m) {
  const std::int64_t smallest = *std::min_element(m.n.begin(), m.n.end());
  const ShapeParams p = params_at(m, smallest);
  const CompactWindow w = m.window_extent > 0.0
                              ? CompactWindow::uniform(static_cast<double>(m.M), m.window_h, m.window_extent)
                              : CompactWindow::for_params(p, m.window_h);
  for (std::int64_t n : m.n) {
    if (auto why = window_inadmissible(w, params_at(m, n))) {
      throw InvalidManifest("window at n = " + std::to_string(n) + ": " + *why);
    }
  }
  return w;
}

void run_agreement(const ExperimentManifest& m, RunOutputs& out) {
  const CompactWindow window = agreement_window(m);
  std::vector<ShapeParams> sweep;
  for (std::int64_t n : m.n) sweep.push_back(params_at(m, n));
  AgreementConfig cfg;
  cfg.master_seed = m.seed;
  cfg.alpha = m.alpha;
  cfg.replicas = m.replicas;
  cfg.threads = m.threads;
  cfg.h = m.window_h;
  cfg.window = window;
  std::vector<ReplicaRecord> recs;
  const AgreementEstimate est = estimate_agreement_probability(sweep, cfg, &recs);

  CsvTable& t = out.samples.table;
  t.columns = {"n",          "replica",      "seed",         "error_code",    "disagreements",
               "event_H",    "event_Z2",     "ambiguous_H",  "ambiguous_Z2",  "touches_H",
               "touches_Z2", "sandwiched",   "window_avoids", "barrier_implication",
               "geodesic_implication"};
  for (const ReplicaRecord& r : recs) {
    Json rec = {{"n", r.n}, {"replica", r.index}, {"seed", r.seed}, {"error_code", code(r.error_code)}};
    if (!r.outcome) {
      t.add(r.n, static_cast<std::uint64_t>(r.index), r.seed, code(r.error_code), "", "", "", "", "", "", "",
            "", "", "", "");
      rec["error"] = r.error;
      out.records.push_back(std::move(rec));
      continue;
    }
    const BarrierOutcome& o = *r.outcome;
    t.add(r.n, static_cast<std::uint64_t>(r.index), r.seed, 0, static_cast<std::uint64_t>(o.disagreements),
          o.event_H(), o.event_Z2(), o.half.ambiguous, o.full.ambiguous,
          o.half.touches_rightmost || o.half.touches_leftmost,
          o.full.touches_rightmost || o.full.touches_leftmost, o.sandwiched, o.window_avoids,
          o.barrier_implication_holds(), o.geodesic_implication_holds());
    std::string bitmap;
    bitmap.reserve(o.agreement.size());
    for (bool a : o.agreement) bitmap += a ? '1' : '0';
    rec["events"] = {{"A_H", o.event_H()}, {"A_Z2", o.event_Z2()}};
    rec["agreement"] = bitmap;
    out.records.push_back(std::move(rec));
  }

  out.summary.columns = {"n",        "p_hat",    "stderr",       "p_A_H",
                         "p_A_Z2",   "replicas", "errors",       "disagree",
                         "event_H",  "event_Z2", "unsandwiched", "implication_exceptions"};
  for (const AgreementRow& r : est.rows) {
    out.summary.add(r.n, r.p_hat, r.std_error, r.p_A_H, r.p_A_Z2, static_cast<std::uint64_t>(r.replicas),
                    static_cast<std::uint64_t>(r.errors), static_cast<std::uint64_t>(r.disagree),
                    static_cast<std::uint64_t>(r.event_H), static_cast<std::uint64_t>(r.event_Z2),
                    static_cast<std::uint64_t>(r.unsandwiched),
                    static_cast<std::uint64_t>(r.implication_exceptions));
  }
  out.samples.metadata["window"] = window_json(window);
  out.samples.metadata["trend"] = {{"slope", est.trend.slope},
                                   {"slope_stderr", est.trend.slope_stderr},
                                   {"z_first_last", est.trend.z_first_last},
                                   {"decreasing_within_noise", est.trend.decreasing_within_noise}};
}

TailGeometry tail_geometry(const ExperimentManifest& m, std::int64_t n) {
  TailGeometry g;
  g.m = n;
  g.m2 = n;
  g.gamma = m.gamma;
  g.cylinder_n = n;
  g.alpha = m.alpha;
  switch (m.kind) {
    case ExperimentKind::OnePointTail:
      g.model = TailModel::Full;
      break;
    case ExperimentKind::ConstrainedTail:
      g.model = TailModel::Cylinder;
      break;
    case ExperimentKind::Fluctuation:
      g.model = m.model == "half" ? TailModel::Half : TailModel::Full;
      break;
    default:
      g.model = TailModel::Half;
      break;
  }
  return g;
}

struct Draw {
  std::uint64_t seed = 0;
  double value = 0.0;
  ReplicaError error = ReplicaError::None;
};

std::vector<Draw> draw_tail_values(const ExperimentManifest& m, const TailGeometry& g) {
  std::vector<Draw> d(m.replicas);
  parallel_for(m.replicas, m.threads, [&](std::size_t k) {
    d[k].seed = tail_seed(g, m.seed, k);
    try {
      d[k].value = sample_tail_value(g, d[k].seed);
    } catch (const std::exception& e) {
      d[k].error = classify_exception(e);
    }
  });
  return d;
}

void run_tails(const ExperimentManifest& m, RunOutputs& out) {
  const bool fluct = m.kind == ExperimentKind::Fluctuation;
  CsvTable& t = out.samples.table;
  t.columns = {"n", "replica", "seed", "error_code", "value", "scaled"};
  if (fluct) {
    out.summary.columns = {"n", "replicas", "excluded", "mean", "variance", "scaled_mean", "scaled_variance"};
  } else {
    out.summary.columns = {"n", "r", "upper", "lower", "count"};
  }
  Json centers = Json::object(), units = Json::object();
  std::vector<double> fit_n;
  std::vector<std::vector<double>> fit_samples;
  for (std::int64_t n : m.n) {
    const TailGeometry g = tail_geometry(m, n);
    // Fluctuations use the scaling 2^(-4/3) n^(-1/3) (L - 4n).
    const double center = fluct ? 4.0 * static_cast<double>(n) : tail_center(g);
    const double unit = fluct ? std::cbrt(16.0 * static_cast<double>(n)) : tail_unit(g);
    centers[std::to_string(n)] = center;
    units[std::to_string(n)] = unit;
    const std::vector<Draw> draws = draw_tail_values(m, g);
    std::vector<double> values, scaled;
    for (std::size_t k = 0; k < draws.size(); ++k) {
      const Draw& d = draws[k];
      if (d.error != ReplicaError::None) {
        t.add(n, static_cast<std::uint64_t>(k), d.seed, code(d.error), "", "");
        continue;
      }
      const double s = (d.value - center) / unit;
      values.push_back(d.value);
      scaled.push_back(s);
      t.add(n, static_cast<std::uint64_t>(k), d.seed, 0, d.value, s);
    }
    const auto excluded = static_cast<std::uint64_t>(draws.size() - values.size());
    if (fluct) {
      if (values.size() >= 2) {
        out.summary.add(n, static_cast<std::uint64_t>(values.size()), excluded, mean(values), variance(values),
                        mean(scaled), variance(scaled));
      } else {
        out.summary.add(n, static_cast<std::uint64_t>(values.size()), excluded, "", "", "", "");
      }
      fit_n.push_back(static_cast<double>(n));
      fit_samples.push_back(values);
    } else {
      for (const TailTableRow& r : tail_table(values, center, unit, m.r_grid)) {
        out.summary.add(n, r.r, r.upper, r.lower, static_cast<std::uint64_t>(r.count));
      }
    }
  }
  out.samples.metadata["centers"] = centers;
  out.samples.metadata["units"] = units;
  if (fluct) {
    try {
      const LinearFit f = variance_exponent_fit(fit_n, fit_samples);
      CsvTable fit;
      fit.columns = {"slope", "intercept", "r2", "slope_stderr", "points"};
      fit.add(f.slope, f.intercept, f.r2, f.slope_stderr, static_cast<std::uint64_t>(fit_n.size()));
      out.extra.emplace_back("fit", std::move(fit));
      out.samples.metadata["fit"] = {{"slope", f.slope}, {"r2", f.r2}};
    } catch (const std::invalid_argument& e) {
      out.samples.metadata["fit"] = {{"skipped", e.what()}};
    }
  }
}

const char* part_name(DeficitPart p) { return p == DeficitPart::TwoTerm ? "i" : "ii"; }

void run_deficit(const ExperimentManifest& m, RunOutputs& out) {
  std::vector<DeficitPart> parts;
  if (m.part != "ii") parts.push_back(DeficitPart::TwoTerm);
  if (m.part != "i") parts.push_back(DeficitPart::ThreeTerm);
  CsvTable& t = out.samples.table;
  t.columns = {"n",     "delta",   "M",         "ell",       "max_deficit", "c_hat",    "part",
               "c_raw", "c_absorbed", "argmax_0", "argmax_1", "argmax_2",    "argmax_3", "evaluations"};
  out.summary.columns = {"part", "c_hat", "n0_hat", "ok"};
  const ShapeParams base = params_at(m, m.n.front());
  for (DeficitPart part : parts) {
    DeficitFit fit;
    if (m.n.size() >= 4) {
      fit = fit_deficit_constant(base, m.n, part);
    } else {
      DeficitSweepRow row;
      row.params = base;
      row.part = part;
      row.max = scan_deficit(base, part);
      row.c_n = -row.max.value / n_pow(base.n, 1.0L / 3.0L + 2.0L * static_cast<long double>(base.delta));
      row.c_raw = deficit_c_raw(base);
      row.c_absorbed = deficit_c_absorbed(base);
      fit.rows.push_back(row);
      fit.c_hat = row.c_n;
      if (row.max.value < 0.0L) fit.n0_hat = base.n;
      fit.ok = row.max.value < 0.0L;
    }
    for (const DeficitSweepRow& r : fit.rows) {
      const bool three = part == DeficitPart::ThreeTerm;
      t.add(r.params.n, r.params.delta, r.params.M, r.params.ell, static_cast<double>(r.max.value),
            static_cast<double>(r.c_n), part_name(part), static_cast<double>(r.c_raw),
            static_cast<double>(r.c_absorbed), r.max.argmax[0], r.max.argmax[1],
            three ? format_number(r.max.argmax[2]) : std::string(),
            three ? format_number(r.max.argmax[3]) : std::string(),
            static_cast<std::uint64_t>(r.max.evaluations));
    }
    out.summary.add(part_name(part), static_cast<double>(fit.c_hat),
                    fit.n0_hat ? format_number(*fit.n0_hat) : std::string(), fit.ok);
  }
}

void run_pfaffian(const ExperimentManifest& m, RunOutputs& out) {
  const MatrixKernel k = synthetic_kernel(m.kernel_C, m.kernel_a, m.kernel_b);
  CsvTable& t = out.samples.table;
  t.columns = {"r", "value", "tail_bound"};
  for (double r : m.r_grid) {
    const FredholmValue v = fredholm_pfaffian(k, FredholmTruncation::exponential(r, m.k_max, m.quadrature));
    t.add(r, v.value, v.tail_bound ? *v.tail_bound : std::nan(""));
  }
  const DecayCertificate& c = *k.certificate;
  out.summary.columns = {"C", "a", "b", "k_max", "quadrature", "r0", "C_prime"};
  const double r0 = *std::min_element(m.r_grid.begin(), m.r_grid.end());
  out.summary.add(c.C, c.a, c.b, m.k_max, m.quadrature, r0, fit_tail_constant(c, r0));
}

void run_geodesics(const ExperimentManifest& m, RunOutputs& out) {
  CsvTable& t = out.samples.table;
  t.columns = {"n", "replica", "seed", "error_code", "geometry", "selection", "step", "i", "j"};
  out.summary.columns = {"n", "replica", "geometry", "value", "touches_rightmost", "touches_leftmost", "ambiguous"};
  struct Pair {
    std::uint64_t seed = 0;
    ReplicaError error = ReplicaError::None;
    Geodesic geo[2][2];  // [half, full][rightmost, leftmost]
  };
  const char* geometry[2] = {"half", "full"};
  const char* selection[2] = {"rightmost", "leftmost"};
  for (std::int64_t n : m.n) {
    const ShapeParams p = params_at(m, n);
    std::vector<Pair> res(m.replicas);
    parallel_for(m.replicas, m.threads, [&](std::size_t k) {
      Pair& r = res[k];
      r.seed = replica_seed(m.seed, n, k);
      try {
        const CoupledWeightField field(r.seed, m.alpha);
        const DomainRestriction dom[2] = {DomainRestriction::half_plane(), DomainRestriction::full_plane()};
        for (int g = 0; g < 2; ++g) {
          r.geo[g][0] = rightmost_geodesic(field, p.barrier_start(), p.barrier_end(), dom[g]);
          r.geo[g][1] = leftmost_geodesic(field, p.barrier_start(), p.barrier_end(), dom[g]);
        }
      } catch (const std::exception& e) {
        r.error = classify_exception(e);
      }
    });
    for (std::size_t k = 0; k < res.size(); ++k) {
      const Pair& r = res[k];
      const auto idx = static_cast<std::uint64_t>(k);
      if (r.error != ReplicaError::None) {
        t.add(n, idx, r.seed, code(r.error), "", "", "", "", "");
        continue;
      }
      for (int g = 0; g < 2; ++g) {
        for (int s = 0; s < 2; ++s) {
          const auto& sites = r.geo[g][s].sites;
          for (std::size_t q = 0; q < sites.size(); ++q) {
            t.add(n, idx, r.seed, 0, geometry[g], selection[s], static_cast<std::uint64_t>(q), sites[q].i,
                  sites[q].j);
          }
        }
        out.summary.add(n, idx, geometry[g], r.geo[g][0].value, touches_diagonal(r.geo[g][0]),
                        touches_diagonal(r.geo[g][1]), r.geo[g][0].sites != r.geo[g][1].sites);
      }
      if (n == m.n.front() && k == 0) {
        for (int g = 0; g < 2; ++g) {
          CsvTable path;
          path.columns = {"i", "j"};
          for (const LatticePoint& q : r.geo[g][0].sites) path.add(q.i, q.j);
          out.extra.emplace_back(std::string("geodesic.") + geometry[g], std::move(path));
        }
      }
    }
  }
}

}  // namespace

RunOutputs run_manifest(const ExperimentManifest& m) {
  m.validate();
  RunOutputs out;
  out.samples.metadata = Json::object();
  switch (m.kind) {
    case ExperimentKind::Agreement:
      run_agreement(m, out);
      break;
    case ExperimentKind::OnePointTail:
    case ExperimentKind::ConstrainedTail:
    case ExperimentKind::HalfTail:
    case ExperimentKind::Fluctuation:
      run_tails(m, out);
      break;
    case ExperimentKind::DeficitScan:
      run_deficit(m, out);
      break;
    case ExperimentKind::PfaffianTable:
      run_pfaffian(m, out);
      break;
    case ExperimentKind::GeodesicExport:
      run_geodesics(m, out);
      break;
  }
  Json& meta = out.samples.metadata;
  meta["manifest"] = to_json(m);
  meta["kind"] = std::string(kind_name(m.kind));
  meta["version"] = kVersion;
  meta["timestamp"] = utc_timestamp();
  meta["config_hash"] = config_hash(m);
  meta["rows"] = out.samples.table.rows.size();
  meta["excluded"] = out.samples.excluded();
  if (!m.reference_cdf.empty()) meta["external_reference_cdf"] = m.reference_cdf;
  return out;
}

std::vector<std::string> write_outputs(const RunOutputs& r, const std::string& prefix) {
  std::vector<std::string> paths;
  auto open = [&](const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    paths.push_back(path);
    return os;
  };
  write_sampleset_file(prefix + ".samples.csv", r.samples);
  paths.push_back(prefix + ".samples.csv");
  {
    auto os = open(prefix + ".summary.csv");
    write_csv(os, r.summary);
  }
  if (!r.records.empty()) {
    auto os = open(prefix + ".jsonl");
    write_jsonl(os, r.records);
  }
  for (const auto& [name, table] : r.extra) {
    auto os = open(prefix + "." + name + ".csv");
    write_csv(os, table);
  }
  return paths;
}

}  // namespace lppkit
