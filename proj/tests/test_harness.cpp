#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lppkit/experiments.hpp"
#include "lppkit/manifest.hpp"
#include "lppkit/sampleset.hpp"

using namespace lppkit;

namespace {

std::string rendered(const SampleSet& s) {
  std::ostringstream os;
  write_sampleset(os, s);
  return os.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "lppkit_harness";
  std::filesystem::create_directories(dir);
  return dir / name;
}

ExperimentManifest small(ExperimentKind kind) {
  ExperimentManifest m;
  m.kind = kind;
  m.replicas = 12;
  m.seed = 99;
  switch (kind) {
    case ExperimentKind::Agreement:
      m.n = {50, 60};
      break;
    case ExperimentKind::DeficitScan:
      m.n = {10000};
      m.delta = 0.1;
      break;
    case ExperimentKind::Fluctuation:
      m.n = {20, 30, 40, 50};
      break;
    case ExperimentKind::GeodesicExport:
      m.n = {50};
      m.replicas = 2;
      break;
    default:
      m.n = {40, 60};
      break;
  }
  return m;
}

}  // namespace

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    CHECK(parse_number(format_number(v)) == v);
  }
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(-INFINITY) == "-inf");
  CHECK(std::isinf(parse_number("inf")));
  CHECK(format_number(std::int64_t{-42}) == "-42");
  CHECK(format_number(std::uint64_t{18446744073709551615u}) == "18446744073709551615");
  CHECK_THROWS(parse_number("1.5x"));
}

TEST_CASE("CSV round trip with quoting") {
  CsvTable t;
  t.columns = {"a", "b"};
  t.add("plain", 1.5);
  t.add("with,comma", -2);
  t.add("quote\"d", true);
  t.add("line\nbreak", std::uint64_t{7});
  std::ostringstream os;
  write_csv(os, t);
  CHECK(os.str().find("\"with,comma\"") != std::string::npos);
  CHECK(os.str().find("\"quote\"\"d\"") != std::string::npos);
  std::istringstream is(os.str());
  const CsvTable back = read_csv(is);
  CHECK(back.columns == t.columns);
  CHECK(back.rows == t.rows);
  CHECK(back.numbers("b") == std::vector<double>{1.5, -2, 1, 7});
  CHECK_THROWS_AS(back.column("c"), std::out_of_range);
  std::istringstream bad("a,b\n1\n");
  CHECK_THROWS_AS(read_csv(bad), std::runtime_error);
}

TEST_CASE("SampleSet files and the data section") {
  SampleSet s;
  s.metadata = {{"kind", "test"}, {"centers", {{"10", 40.0}}}};
  s.table.columns = {"n", "replica", "error_code", "value"};
  s.table.add(10, 0, 0, 41.5);
  s.table.add(10, 1, 2, 0.0);
  s.table.add(20, 0, 0, 80.25);
  const std::string text = rendered(s);
  const std::string data = data_section(text);
  CHECK(data == "10,0,0,41.5\n10,1,2,0\n20,0,0,80.25\n");

  std::istringstream is(text);
  const SampleSet back = read_sampleset(is);
  CHECK(back.metadata == s.metadata);
  CHECK(back.table.rows == s.table.rows);
  CHECK(back.excluded() == 1);
  CHECK(back.valid_rows() == std::vector<std::size_t>{0, 2});
  CHECK(back.values("value") == std::vector<double>{41.5, 80.25});
  CHECK(back.values("value", 10) == std::vector<double>{41.5});

  const auto path = scratch("roundtrip.samples.csv");
  write_sampleset_file(path.string(), s);
  CHECK(rendered(read_sampleset_file(path.string())) == text);
  CHECK_THROWS(read_sampleset_file((scratch("missing") / "x.csv").string()));
}

TEST_CASE("JSONL records") {
  const std::vector<Json> recs{{{"n", 50}, {"events", {{"A_H", true}}}}, {{"n", 60}}};
  std::ostringstream os;
  write_jsonl(os, recs);
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  std::istringstream is(text);
  CHECK(read_jsonl(is) == recs);
}

TEST_CASE("manifest validation") {
  ExperimentManifest m;
  CHECK_NOTHROW(m.validate());
  m.n = {};
  CHECK_THROWS_AS(m.validate(), InvalidManifest);
  m.n = {0};
  CHECK_THROWS_AS(m.validate(), InvalidManifest);
  m.n = {50, 50};
  CHECK_THROWS_AS(m.validate(), InvalidManifest);
  m = {};
  m.alpha = 0.0;
  CHECK_THROWS_AS(m.validate(), InvalidManifest);
  m = {};
  m.delta = 0.0;
  CHECK_THROWS_AS(m.validate(), InvalidManifest);
  m = {};
  m.kind = ExperimentKind::DeficitScan;
  m.n = {10000, 100000};
  CHECK_THROWS_AS(m.validate(), InvalidManifest);
  m = {};
  m.kind = ExperimentKind::PfaffianTable;
  m.kernel_a = 0.5;
  CHECK_THROWS_AS(m.validate(), InvalidManifest);
  CHECK_THROWS_AS(manifest_from_json(Json{{"kind", "agreement"}, {"bogus", 1}}), InvalidManifest);
  CHECK_THROWS_AS(parse_kind("nope"), InvalidManifest);
  m = {};
  m.window_extent = 1.0;
  CHECK_THROWS_AS(run_manifest(m), InvalidManifest);
}

TEST_CASE("manifest JSON round trip and config hash") {
  ExperimentManifest m = small(ExperimentKind::HalfTail);
  m.r_grid = {0, 1, 2};
  const ExperimentManifest back = manifest_from_json(to_json(m));
  CHECK(to_json(back) == to_json(m));
  for (ExperimentKind k : {ExperimentKind::Agreement, ExperimentKind::Fluctuation, ExperimentKind::GeodesicExport}) {
    CHECK(parse_kind(kind_name(k)) == k);
  }
  const std::string h = config_hash(m);
  CHECK(h.size() == 16);
  ExperimentManifest t = m;
  t.threads = 8;
  t.out = "elsewhere";
  CHECK(config_hash(t) == h);
  t.seed = 100;
  CHECK(config_hash(t) != h);
}

TEST_CASE("runs are reproducible and thread invariant for every kind") {
  for (ExperimentKind k : {ExperimentKind::Agreement, ExperimentKind::OnePointTail, ExperimentKind::ConstrainedTail,
                           ExperimentKind::HalfTail, ExperimentKind::Fluctuation, ExperimentKind::DeficitScan,
                           ExperimentKind::PfaffianTable, ExperimentKind::GeodesicExport}) {
    CAPTURE(kind_name(k));
    ExperimentManifest m = small(k);
    const RunOutputs a = run_manifest(m);
    const RunOutputs b = run_manifest(m);
    m.threads = 3;
    const RunOutputs c = run_manifest(m);
    const std::string da = data_section(rendered(a.samples));
    CHECK(!da.empty());
    CHECK(da == data_section(rendered(b.samples)));
    CHECK(da == data_section(rendered(c.samples)));
    CHECK(a.summary.rows == c.summary.rows);
    CHECK(a.samples.metadata["config_hash"] == c.samples.metadata["config_hash"]);
    CHECK(a.samples.metadata["kind"] == std::string(kind_name(k)));
    CHECK(a.samples.metadata["rows"] == a.samples.table.rows.size());
  }
}

TEST_CASE("zero replicas give a header and no rows") {
  ExperimentManifest m = small(ExperimentKind::HalfTail);
  m.replicas = 0;
  const RunOutputs r = run_manifest(m);
  CHECK(r.samples.table.rows.empty());
  CHECK(data_section(rendered(r.samples)).empty());
  CHECK_FALSE(r.samples.table.columns.empty());
}

TEST_CASE("outputs on disk") {
  ExperimentManifest m = small(ExperimentKind::Agreement);
  const std::string prefix = scratch("agree").string();
  const auto paths = write_outputs(run_manifest(m), prefix);
  CHECK(paths.size() >= 3);
  for (const auto& p : paths) CHECK(std::filesystem::exists(p));
  const SampleSet s = read_sampleset_file(prefix + ".samples.csv");
  CHECK(s.table.rows.size() == 24);
  CHECK(s.metadata["manifest"]["seed"] == 99);
  std::ifstream js(prefix + ".jsonl");
  const auto recs = read_jsonl(js);
  REQUIRE(recs.size() == 24);
  CHECK(recs[0].contains("agreement"));
}

TEST_CASE("tail table from persisted metadata") {
  const RunOutputs r = run_manifest(small(ExperimentKind::HalfTail));
  std::istringstream is(rendered(r.samples));
  SampleSet s = read_sampleset(is);
  const auto rows = tail_table(s, 40, {0, 1, 2});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].count == 12);
  CHECK(rows[0].upper + rows[0].lower >= 1.0);
  s.metadata["centers"]["40"] = 1e6;
  CHECK_THROWS_AS(tail_table(s, 40, {0, 1}), std::invalid_argument);
  s.metadata.erase("centers");
  CHECK_THROWS_AS(tail_table(s, 40, {0, 1}), std::invalid_argument);
}

TEST_CASE("two-sample KS over SampleSets and external reference CDFs") {
  const RunOutputs r = run_manifest(small(ExperimentKind::HalfTail));
  CHECK(two_sample_ks(r.samples, r.samples, "scaled", 40, 40) == 0.0);
  CHECK(two_sample_ks(r.samples, r.samples, "scaled", 40, 60) > 0.0);

  const auto path = scratch("ref.csv");
  {
    std::ofstream os(path);
    os << "x,cdf\n-1,0\n0,0.5\n1,1\n";
  }
  const ReferenceCdf ref = read_reference_cdf(path.string());
  CHECK(ref.source.find("ref.csv") != std::string::npos);
  CHECK(ref(-5) == 0.0);
  CHECK(ref(0.5) == 0.75);
  CHECK(ref(9) == 1.0);
}
