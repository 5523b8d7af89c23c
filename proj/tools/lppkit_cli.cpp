// lppkit: command-line front end for manifest-driven runs and for statistics
// over persisted SampleSet files.
//
// Exit codes: 0 success, 1 invalid manifest or arguments, 2 runtime failure.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lppkit/experiments.hpp"
#include "lppkit/manifest.hpp"
#include "lppkit/sampleset.hpp"
#include "lppkit/stats.hpp"

namespace {

using namespace lppkit;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::vector<std::int64_t> n;
  std::optional<double> alpha, delta, ell, gamma;
  std::optional<std::int64_t> bigM;
  std::optional<std::uint64_t> replicas;
  unsigned threads = 1;
  std::string out;
  std::string reference_cdf;
  std::string manifest;
};

struct Local {
  std::optional<double> window_h, window_extent;
  std::vector<double> r_grid;
  std::string tail_kind = "half";
  std::optional<std::string> model;
  std::optional<std::string> part;
  std::optional<double> C, a, b;
  std::optional<int> k_max, quadrature;
};

ExperimentManifest load_manifest(const Globals& g) {
  if (g.manifest.empty()) return {};
  std::ifstream is(g.manifest);
  if (!is) throw InvalidManifest("cannot open manifest '" + g.manifest + "'");
  try {
    return manifest_from_json(Json::parse(is));
  } catch (const Json::parse_error& e) {
    throw InvalidManifest(std::string("manifest is not JSON: ") + e.what());
  }
}

template <class T, class U>
void set_if(const std::optional<T>& v, U& field) {
  if (v) field = *v;
}

ExperimentManifest build_manifest(ExperimentKind kind, const Globals& g, const Local& l) {
  ExperimentManifest m = load_manifest(g);
  if (!g.manifest.empty() && m.kind != kind) {
    throw InvalidManifest("manifest kind '" + std::string(kind_name(m.kind)) + "' does not match the subcommand");
  }
  m.kind = kind;
  set_if(g.seed, m.seed);
  if (!g.n.empty()) m.n = g.n;
  set_if(g.alpha, m.alpha);
  set_if(g.delta, m.delta);
  set_if(g.bigM, m.M);
  set_if(g.ell, m.ell);
  set_if(g.gamma, m.gamma);
  set_if(g.replicas, m.replicas);
  m.threads = g.threads;
  if (!g.out.empty()) m.out = g.out;
  if (!g.reference_cdf.empty()) m.reference_cdf = g.reference_cdf;
  set_if(l.window_h, m.window_h);
  set_if(l.window_extent, m.window_extent);
  if (!l.r_grid.empty()) m.r_grid = l.r_grid;
  set_if(l.model, m.model);
  set_if(l.part, m.part);
  set_if(l.C, m.kernel_C);
  set_if(l.a, m.kernel_a);
  set_if(l.b, m.kernel_b);
  set_if(l.k_max, m.k_max);
  set_if(l.quadrature, m.quadrature);
  if (m.out.empty()) m.out = std::string(kind_name(kind));
  return m;
}

int run_experiment(ExperimentKind kind, const Globals& g, const Local& l) {
  const ExperimentManifest m = build_manifest(kind, g, l);
  m.validate();
  const RunOutputs r = run_manifest(m);
  for (const std::string& p : write_outputs(r, m.out)) std::cerr << "wrote " << p << '\n';
  if (r.samples.excluded() > 0) {
    std::cerr << r.samples.excluded() << " row(s) carry a nonzero error_code\n";
  }
  return 0;
}

struct StatsArgs {
  std::string in;
  std::string in2;
  std::string column = "scaled";
  std::int64_t n_a = -1;
  std::int64_t n_b = -1;
  std::vector<double> r_grid;
};

std::vector<std::int64_t> sweep_values(const SampleSet& s) {
  std::vector<std::int64_t> ns;
  if (!s.table.has_column("n")) return ns;
  std::map<std::int64_t, bool> seen;
  for (double v : s.table.numbers("n")) seen[static_cast<std::int64_t>(v)] = true;
  for (const auto& [n, unused] : seen) ns.push_back(n);
  return ns;
}

int run_stats(const StatsArgs& a, const Globals& g) {
  const SampleSet s = read_sampleset_file(a.in);
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!g.out.empty()) {
    file.open(g.out + ".stats.csv", std::ios::binary);
    if (!file) throw std::runtime_error("cannot open '" + g.out + ".stats.csv' for writing");
    os = &file;
  }

  CsvTable t;
  t.columns = {"statistic", "n", "value", "count", "source"};
  const std::vector<std::int64_t> ns = sweep_values(s);
  const std::vector<std::int64_t> groups = ns.empty() ? std::vector<std::int64_t>{-1} : ns;
  for (std::int64_t n : groups) {
    const std::vector<double> v = s.values(a.column, n);
    const auto count = static_cast<std::uint64_t>(v.size());
    if (!v.empty()) t.add("mean", n, mean(v), count, a.in);
    if (v.size() >= 2) t.add("variance", n, variance(v), count, a.in);
  }
  t.add("excluded", "", static_cast<double>(s.excluded()), static_cast<std::uint64_t>(s.table.rows.size()), a.in);

  if (!a.in2.empty()) {
    const SampleSet s2 = read_sampleset_file(a.in2);
    const double d = two_sample_ks(s, s2, a.column, a.n_a, a.n_b);
    t.add("ks_two_sample", a.n_a, d, static_cast<std::uint64_t>(s.values(a.column, a.n_a).size()),
          a.in + " vs " + a.in2);
  }
  if (!g.reference_cdf.empty()) {
    const ReferenceCdf ref = read_reference_cdf(g.reference_cdf);
    const std::vector<double> v = s.values(a.column, a.n_a);
    t.add("ks_reference", a.n_a, ks_statistic(v, ref), static_cast<std::uint64_t>(v.size()),
          "external:" + ref.source);
  }
  write_csv(*os, t);

  if (!a.r_grid.empty()) {
    CsvTable tails;
    tails.columns = {"n", "r", "upper", "lower", "count"};
    for (std::int64_t n : ns) {
      for (const TailTableRow& r : tail_table(s, n, a.r_grid)) {
        tails.add(n, r.r, r.upper, r.lower, static_cast<std::uint64_t>(r.count));
      }
    }
    if (!g.out.empty()) {
      std::ofstream tf(g.out + ".tails.csv", std::ios::binary);
      if (!tf) throw std::runtime_error("cannot open '" + g.out + ".tails.csv' for writing");
      write_csv(tf, tails);
    } else {
      std::cout << '\n';
      write_csv(std::cout, tails);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Last passage percolation toolkit: coupled half/full-space experiments"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file");

  Globals g;
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--n", g.n, "comma-separated n sweep")->delimiter(',');
  app.add_option("--alpha", g.alpha, "diagonal weight rate");
  app.add_option("--delta", g.delta, "barrier offset exponent");
  app.add_option("--bigM", g.bigM, "barrier half-length M");
  app.add_option("--ell", g.ell, "barrier offset fraction");
  app.add_option("--gamma", g.gamma, "cylinder width parameter");
  app.add_option("--replicas", g.replicas, "replicas per sweep point");
  app.add_option("--threads", g.threads, "worker threads (0 = all cores); never changes outputs");
  app.add_option("--out", g.out, "output path prefix");
  app.add_option("--reference-cdf", g.reference_cdf, "external reference CDF table (columns x,cdf)");
  app.add_option("--manifest", g.manifest, "JSON manifest; flags override its fields");

  Local l;
  auto* agreement = app.add_subcommand("agreement", "coupled agreement probability over the n sweep");
  agreement->add_option("--window-h", l.window_h, "window grid step");
  agreement->add_option("--window-extent", l.window_extent, "window |x|,|y| extent");

  auto* tails = app.add_subcommand("tails", "one-point tail or fluctuation samples");
  tails->add_option("--kind", l.tail_kind, "one-point | half | constrained | fluctuation")
      ->check(CLI::IsMember({"one-point", "half", "constrained", "fluctuation"}));
  tails->add_option("--model", l.model, "fluctuation model: full | half")->check(CLI::IsMember({"full", "half"}));
  tails->add_option("--r-grid", l.r_grid, "comma-separated r values")->delimiter(',');

  auto* deficit = app.add_subcommand("deficit-scan", "scanned maxima of the diagonal deficits");
  deficit->add_option("--part", l.part, "i | ii | both")->check(CLI::IsMember({"i", "ii", "both"}));

  app.add_subcommand("geodesic", "barrier geodesics in both geometries");

  auto* pf = app.add_subcommand("pfaffian", "truncated Fredholm Pfaffian table on the certificate kernel");
  pf->add_option("--C", l.C, "certificate constant");
  pf->add_option("--a", l.a, "certificate decay a");
  pf->add_option("--b", l.b, "certificate growth b");
  pf->add_option("--k-max", l.k_max, "truncation order");
  pf->add_option("--quadrature", l.quadrature, "Gauss-Legendre order");
  pf->add_option("--r-grid", l.r_grid, "comma-separated r values")->delimiter(',');

  StatsArgs sa;
  auto* stats = app.add_subcommand("stats", "estimators over persisted SampleSet files");
  stats->add_option("--in", sa.in, "SampleSet file")->required()->check(CLI::ExistingFile);
  stats->add_option("--in2", sa.in2, "second SampleSet for the two-sample KS statistic")->check(CLI::ExistingFile);
  stats->add_option("--column", sa.column, "value column");
  stats->add_option("--n-a", sa.n_a, "restrict the first set to this n");
  stats->add_option("--n-b", sa.n_b, "restrict the second set to this n");
  stats->add_option("--r-grid", sa.r_grid, "tail table r values")->delimiter(',');

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (agreement->parsed()) return run_experiment(ExperimentKind::Agreement, g, l);
    if (tails->parsed()) {
      static const std::map<std::string, ExperimentKind> kinds{
          {"one-point", ExperimentKind::OnePointTail},
          {"half", ExperimentKind::HalfTail},
          {"constrained", ExperimentKind::ConstrainedTail},
          {"fluctuation", ExperimentKind::Fluctuation}};
      return run_experiment(kinds.at(l.tail_kind), g, l);
    }
    if (deficit->parsed()) return run_experiment(ExperimentKind::DeficitScan, g, l);
    if (app.got_subcommand("geodesic")) return run_experiment(ExperimentKind::GeodesicExport, g, l);
    if (pf->parsed()) return run_experiment(ExperimentKind::PfaffianTable, g, l);
    if (stats->parsed()) return run_stats(sa, g);
  } catch (const InvalidManifest& e) {
    std::cerr << "invalid manifest: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
