#pragma once

// Persisted tables. A SampleSet file is one JSON metadata line, a CSV header
// row, then one CSV row per replica. The data section is the rows only.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "lppkit/stats.hpp"

namespace lppkit {

using Json = nlohmann::json;

/// Shortest round-trip decimal, independent of the global locale.
std::string format_number(double v);
std::string format_number(std::int64_t v);
std::string format_number(std::uint64_t v);
inline std::string format_number(int v) { return format_number(static_cast<std::int64_t>(v)); }
inline std::string format_number(unsigned v) { return format_number(static_cast<std::uint64_t>(v)); }
double parse_number(std::string_view s);

/// Quotes a field when it holds a comma, quote, CR or LF.
std::string csv_field(std::string_view s);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Throws std::out_of_range for an unknown column.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  std::vector<double> numbers(std::string_view name) const;

  template <class... T>
  void add(const T&... cells) {
    rows.push_back({format_cell(cells)...});
  }

 private:
  static std::string format_cell(const std::string& s) { return s; }
  static std::string format_cell(const char* s) { return s; }
  template <class T>
  static std::string format_cell(const T& v) {
    if constexpr (std::is_same_v<T, bool>) {
      return v ? "1" : "0";
    } else {
      return format_number(v);
    }
  }
};

void write_csv(std::ostream& os, const CsvTable& t);
/// RFC 4180 reader; the first record is the header. Throws std::runtime_error on
/// a malformed record or a row whose width differs from the header.
CsvTable read_csv(std::istream& is);

struct SampleSet {
  Json metadata;
  CsvTable table;

  /// Rows with error_code 0 (all rows when the column is absent).
  std::vector<std::size_t> valid_rows() const;
  std::size_t excluded() const;
  /// A numeric column restricted to valid rows, optionally to rows with column n == n.
  std::vector<double> values(std::string_view column, std::int64_t n = -1) const;
};

void write_sampleset(std::ostream& os, const SampleSet& s);
SampleSet read_sampleset(std::istream& is);
void write_sampleset_file(const std::string& path, const SampleSet& s);
SampleSet read_sampleset_file(const std::string& path);

/// Everything after the metadata line and the CSV header of a SampleSet file.
std::string data_section(std::string_view file_contents);

void write_jsonl(std::ostream& os, const std::vector<Json>& records);
std::vector<Json> read_jsonl(std::istream& is);

/// KS statistic between the valid `column` values of two sets.
double two_sample_ks(const SampleSet& a, const SampleSet& b, std::string_view column = "scaled",
                     std::int64_t n_a = -1, std::int64_t n_b = -1);

/// Tail frequencies of a persisted tail set at sweep point n, centered and scaled
/// by the metadata entries "centers" and "units". Throws std::invalid_argument
/// when those are missing or disagree with the per-row columns.
std::vector<TailTableRow> tail_table(const SampleSet& s, std::int64_t n, const std::vector<double>& r_grid);

CsvTable tail_table_csv(const std::vector<TailTableRow>& rows);

/// External reference table with columns x, cdf; `source` is the file it came from.
struct ReferenceCdf {
  std::string source;
  std::vector<double> x;
  std::vector<double> cdf;
  /// Piecewise-linear interpolation, clamped to [cdf.front(), cdf.back()].
  double operator()(double v) const;
};

ReferenceCdf read_reference_cdf(const std::string& path);

}  // namespace lppkit
