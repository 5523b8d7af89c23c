#include "lppkit/manifest.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <utility>

#include "lppkit/shape.hpp"

namespace lppkit {

namespace {

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 8> kKinds{{
    {ExperimentKind::Agreement, "agreement"},
    {ExperimentKind::OnePointTail, "one-point-tail"},
    {ExperimentKind::ConstrainedTail, "constrained-tail"},
    {ExperimentKind::HalfTail, "half-tail"},
    {ExperimentKind::DeficitScan, "deficit-scan"},
    {ExperimentKind::PfaffianTable, "pfaffian-table"},
    {ExperimentKind::GeodesicExport, "geodesic-export"},
    {ExperimentKind::Fluctuation, "fluctuation"},
}};

[[noreturn]] void bad(const std::string& what) { throw InvalidManifest(what); }

}  // namespace

std::string_view kind_name(ExperimentKind k) {
  for (const auto& [kind, name] : kKinds) {
    if (kind == k) return name;
  }
  return "unknown";
}

ExperimentKind parse_kind(std::string_view name) {
  for (const auto& [kind, n] : kKinds) {
    if (n == name) return kind;
  }
  bad("unknown experiment kind '" + std::string(name) + "'");
}

void ExperimentManifest::validate() const {
  const bool needs_n = kind != ExperimentKind::PfaffianTable;
  if (needs_n && n.empty()) bad("n: the sweep is empty");
  for (std::int64_t v : n) {
    if (v < 1) bad("n: every sweep value must be positive");
  }
  for (std::size_t a = 0; a < n.size(); ++a) {
    for (std::size_t b = a + 1; b < n.size(); ++b) {
      if (n[a] == n[b]) bad("n: repeated sweep value " + std::to_string(n[a]));
    }
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) bad("alpha: must be positive");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) bad("gamma: must be positive");
  if (!(window_h > 0.0)) bad("window_h: must be positive");
  if (window_extent < 0.0) bad("window_extent: must be nonnegative");
  for (double r : r_grid) {
    if (!std::isfinite(r)) bad("r_grid: values must be finite");
  }
  if (model != "full" && model != "half") bad("model: expected 'full' or 'half'");
  if (part != "i" && part != "ii" && part != "both") bad("part: expected 'i', 'ii' or 'both'");

  switch (kind) {
    case ExperimentKind::Agreement:
    case ExperimentKind::GeodesicExport:
    case ExperimentKind::DeficitScan:
      for (std::int64_t v : n) {
        ShapeParams p{v, delta, M, ell, gamma};
        try {
          p.validate();
        } catch (const std::invalid_argument& e) {
          bad("n = " + std::to_string(v) + ": " + e.what());
        }
        if (!p.admissible()) bad("n = " + std::to_string(v) + ": barrier endpoints leave the half-plane");
      }
      if (kind == ExperimentKind::DeficitScan && n.size() < 4 && n.size() != 1) {
        bad("n: a deficit fit needs one value or at least four");
      }
      break;
    case ExperimentKind::ConstrainedTail:
      for (std::int64_t v : n) {
        if (v < 2) bad("n: cylinder tails need n >= 2");
      }
      break;
    case ExperimentKind::PfaffianTable:
      if (!(kernel_C > 0.0) || !(kernel_a > kernel_b)) bad("kernel: need C > 0 and a > b");
      if (k_max < 1 || k_max > 64) bad("k_max: must lie in [1, 64]");
      if (quadrature < 1 || quadrature > 400) bad("quadrature: must lie in [1, 400]");
      if (r_grid.empty()) bad("r_grid: empty");
      break;
    case ExperimentKind::Fluctuation:
    case ExperimentKind::OnePointTail:
    case ExperimentKind::HalfTail:
      break;
  }
}

nlohmann::json to_json(const ExperimentManifest& m) {
  return {
      {"kind", std::string(kind_name(m.kind))},
      {"n", m.n},
      {"alpha", m.alpha},
      {"delta", m.delta},
      {"M", m.M},
      {"ell", m.ell},
      {"gamma", m.gamma},
      {"replicas", m.replicas},
      {"seed", m.seed},
      {"window_h", m.window_h},
      {"window_extent", m.window_extent},
      {"r_grid", m.r_grid},
      {"model", m.model},
      {"part", m.part},
      {"kernel_C", m.kernel_C},
      {"kernel_a", m.kernel_a},
      {"kernel_b", m.kernel_b},
      {"k_max", m.k_max},
      {"quadrature", m.quadrature},
      {"threads", m.threads},
      {"out", m.out},
      {"reference_cdf", m.reference_cdf},
  };
}

ExperimentManifest manifest_from_json(const nlohmann::json& j) {
  if (!j.is_object()) bad("manifest must be a JSON object");
  ExperimentManifest m;
  const nlohmann::json known = to_json(m);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) bad("unknown manifest key '" + key + "'");
  }
  try {
    if (j.contains("kind")) m.kind = parse_kind(j["kind"].get<std::string>());
    auto read = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
    };
    read("n", m.n);
    read("alpha", m.alpha);
    read("delta", m.delta);
    read("M", m.M);
    read("ell", m.ell);
    read("gamma", m.gamma);
    read("replicas", m.replicas);
    read("seed", m.seed);
    read("window_h", m.window_h);
    read("window_extent", m.window_extent);
    read("r_grid", m.r_grid);
    read("model", m.model);
    read("part", m.part);
    read("kernel_C", m.kernel_C);
    read("kernel_a", m.kernel_a);
    read("kernel_b", m.kernel_b);
    read("k_max", m.k_max);
    read("quadrature", m.quadrature);
    read("threads", m.threads);
    read("out", m.out);
    read("reference_cdf", m.reference_cdf);
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("manifest field has the wrong type: ") + e.what());
  }
  return m;
}

std::string config_hash(const ExperimentManifest& m) {
  nlohmann::json j = to_json(m);
  j.erase("threads");
  j.erase("out");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace lppkit
