#pragma once

// Experiment manifests: everything a run depends on, with a JSON echo and a
// content hash over the fields that can change outputs.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace lppkit {

enum class ExperimentKind {
  Agreement,
  OnePointTail,
  ConstrainedTail,
  HalfTail,
  DeficitScan,
  PfaffianTable,
  GeodesicExport,
  Fluctuation,
};

std::string_view kind_name(ExperimentKind k);
/// Throws InvalidManifest for an unknown name.
ExperimentKind parse_kind(std::string_view name);

struct InvalidManifest : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ExperimentManifest {
  ExperimentKind kind = ExperimentKind::Agreement;
  std::vector<std::int64_t> n{50};
  double alpha = 0.5;
  double delta = 0.3;
  std::int64_t M = 1;
  double ell = 0.5;
  double gamma = 1.0;
  std::uint64_t replicas = 100;
  std::uint64_t seed = 1;
  /// Window grid step and optional |x|, |y| extent; the extent defaults to the
  /// admissible one at the smallest n.
  double window_h = 0.25;
  double window_extent = 0.0;
  /// Tail and Pfaffian r-grid.
  std::vector<double> r_grid{0, 0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4};
  /// Fluctuation model: "full" or "half".
  std::string model = "full";
  /// Deficit part: "i", "ii" or "both".
  std::string part = "both";
  /// Synthetic Pfaffian kernel certificate and truncation.
  double kernel_C = 0.5;
  double kernel_a = 2.0;
  double kernel_b = 1.0;
  int k_max = 6;
  int quadrature = 40;

  unsigned threads = 1;
  std::string out;
  std::string reference_cdf;

  /// Throws InvalidManifest naming the first bad field.
  void validate() const;
};

/// Every field, for echo into output metadata.
nlohmann::json to_json(const ExperimentManifest& m);
/// Unknown keys are rejected; missing keys keep their defaults.
ExperimentManifest manifest_from_json(const nlohmann::json& j);

/// FNV-1a 64 of the canonical JSON without threads and out, as 16 hex digits.
std::string config_hash(const ExperimentManifest& m);

}  // namespace lppkit
