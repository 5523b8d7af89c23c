#pragma once

// Manifest-driven runs. Every output is a pure function of the manifest; the
// thread count changes only the wall time.

#include <string>
#include <utility>
#include <vector>

#include "lppkit/manifest.hpp"
#include "lppkit/sampleset.hpp"

namespace lppkit {

inline constexpr const char* kVersion = "lppkit 1.0.0";

struct RunOutputs {
  /// Per-replica (or per-point) rows with the metadata header.
  SampleSet samples;
  /// Aggregates: agreement probabilities, tail tables, variances, fits.
  CsvTable summary;
  /// One JSON record per replica; empty for kinds without replicas.
  std::vector<Json> records;
  /// Additional tables written as <prefix>.<name>.csv.
  std::vector<std::pair<std::string, CsvTable>> extra;
};

/// Throws InvalidManifest before any work when the manifest does not validate.
RunOutputs run_manifest(const ExperimentManifest& m);

/// Writes <prefix>.samples.csv, <prefix>.summary.csv, <prefix>.jsonl (when
/// there are records) and the extra tables. Returns the paths written.
std::vector<std::string> write_outputs(const RunOutputs& r, const std::string& prefix);

}  // namespace lppkit
