#include "lppkit/sampleset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace lppkit {

namespace {

template <class T>
std::string to_chars_string(T v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return to_chars_string(v);
}

std::string format_number(std::int64_t v) { return to_chars_string(v); }
std::string format_number(std::uint64_t v) { return to_chars_string(v); }

double parse_number(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::size_t CsvTable::column(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("no column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

bool CsvTable::has_column(std::string_view name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::vector<double> CsvTable::numbers(std::string_view name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(parse_number(r.at(c)));
  return out;
}

namespace {

void write_record(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) os << ',';
    os << csv_field(cells[k]);
  }
  os << '\n';
}

/// Reads one RFC 4180 record; false at end of input.
bool read_record(std::istream& is, std::vector<std::string>& out) {
  out.clear();
  if (is.peek() == std::char_traits<char>::eof()) return false;
  std::string cell;
  bool quoted = false;
  bool was_quoted = false;
  for (;;) {
    const int ci = is.get();
    if (ci == std::char_traits<char>::eof()) {
      if (quoted) throw std::runtime_error("unterminated quoted CSV field");
      out.push_back(std::move(cell));
      return true;
    }
    const char c = static_cast<char>(ci);
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          cell += '"';
          is.get();
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
      continue;
    }
    if (c == '"') {
      if (!cell.empty() || was_quoted) throw std::runtime_error("stray quote in CSV field");
      quoted = was_quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
      was_quoted = false;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && is.peek() == '\n') is.get();
      out.push_back(std::move(cell));
      return true;
    } else {
      if (was_quoted) throw std::runtime_error("text after closing quote in CSV field");
      cell += c;
    }
  }
}

}  // namespace

void write_csv(std::ostream& os, const CsvTable& t) {
  write_record(os, t.columns);
  for (const auto& r : t.rows) {
    if (r.size() != t.columns.size()) throw std::logic_error("CSV row width differs from header");
    write_record(os, r);
  }
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  if (!read_record(is, t.columns)) throw std::runtime_error("CSV input has no header row");
  std::vector<std::string> rec;
  while (read_record(is, rec)) {
    if (rec.size() != t.columns.size()) {
      throw std::runtime_error("CSV row " + std::to_string(t.rows.size() + 1) + " has " +
                               std::to_string(rec.size()) + " fields, header has " +
                               std::to_string(t.columns.size()));
    }
    t.rows.push_back(rec);
  }
  return t;
}

std::vector<std::size_t> SampleSet::valid_rows() const {
  std::vector<std::size_t> out;
  const bool has_code = table.has_column("error_code");
  const std::size_t c = has_code ? table.column("error_code") : 0;
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    if (!has_code || table.rows[k][c] == "0") out.push_back(k);
  }
  return out;
}

std::size_t SampleSet::excluded() const { return table.rows.size() - valid_rows().size(); }

std::vector<double> SampleSet::values(std::string_view column, std::int64_t n) const {
  const std::size_t c = table.column(column);
  const bool by_n = n >= 0;
  const std::size_t cn = by_n ? table.column("n") : 0;
  std::vector<double> out;
  for (std::size_t k : valid_rows()) {
    const auto& row = table.rows[k];
    if (by_n && parse_number(row[cn]) != static_cast<double>(n)) continue;
    out.push_back(parse_number(row[c]));
  }
  return out;
}

void write_sampleset(std::ostream& os, const SampleSet& s) {
  os << s.metadata.dump() << '\n';
  write_csv(os, s.table);
}

SampleSet read_sampleset(std::istream& is) {
  SampleSet s;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("SampleSet input is empty");
  try {
    s.metadata = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(std::string("SampleSet metadata line is not JSON: ") + e.what());
  }
  s.table = read_csv(is);
  return s;
}

void write_sampleset_file(const std::string& path, const SampleSet& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_sampleset(os, s);
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

SampleSet read_sampleset_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_sampleset(is);
}

std::string data_section(std::string_view contents) {
  std::istringstream is{std::string(contents)};
  std::string meta;
  std::getline(is, meta);
  std::vector<std::string> header;
  read_record(is, header);
  const auto offset = is.tellg();
  if (offset < 0) return {};
  return std::string(contents.substr(static_cast<std::size_t>(offset)));
}

void write_jsonl(std::ostream& os, const std::vector<Json>& records) {
  for (const Json& r : records) os << r.dump() << '\n';
}

std::vector<Json> read_jsonl(std::istream& is) {
  std::vector<Json> out;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) out.push_back(Json::parse(line));
  }
  return out;
}

double two_sample_ks(const SampleSet& a, const SampleSet& b, std::string_view column, std::int64_t n_a,
                     std::int64_t n_b) {
  return two_sample_ks(a.values(column, n_a), b.values(column, n_b));
}

std::vector<TailTableRow> tail_table(const SampleSet& s, std::int64_t n, const std::vector<double>& r_grid) {
  const std::string key = std::to_string(n);
  const Json& m = s.metadata;
  if (!m.contains("centers") || !m.contains("units") || !m["centers"].contains(key) ||
      !m["units"].contains(key)) {
    throw std::invalid_argument("mismatched metadata: no tail centering recorded for n = " + key);
  }
  const double center = m["centers"][key].get<double>();
  const double unit = m["units"][key].get<double>();
  const std::vector<double> v = s.values("value", n);
  if (s.table.has_column("scaled")) {
    const std::vector<double> scaled = s.values("scaled", n);
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (std::abs(scaled[k] - (v[k] - center) / unit) > 1e-12 * std::max(1.0, std::abs(scaled[k]))) {
        throw std::invalid_argument("mismatched metadata: scaled column disagrees with the centering for n = " + key);
      }
    }
  }
  return tail_table(v, center, unit, r_grid);
}

CsvTable tail_table_csv(const std::vector<TailTableRow>& rows) {
  CsvTable t;
  t.columns = {"r", "upper", "lower", "count"};
  for (const auto& r : rows) t.add(r.r, r.upper, r.lower, static_cast<std::uint64_t>(r.count));
  return t;
}

double ReferenceCdf::operator()(double v) const {
  if (x.empty()) throw std::logic_error("empty reference CDF");
  if (v <= x.front()) return cdf.front();
  if (v >= x.back()) return cdf.back();
  const auto it = std::upper_bound(x.begin(), x.end(), v);
  const std::size_t k = static_cast<std::size_t>(it - x.begin());
  const double t = (v - x[k - 1]) / (x[k] - x[k - 1]);
  return cdf[k - 1] + t * (cdf[k] - cdf[k - 1]);
}

ReferenceCdf read_reference_cdf(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open reference CDF '" + path + "'");
  const CsvTable t = read_csv(is);
  ReferenceCdf r;
  r.source = path;
  r.x = t.numbers("x");
  r.cdf = t.numbers("cdf");
  if (r.x.size() < 2) throw std::runtime_error("reference CDF needs at least two rows");
  for (std::size_t k = 1; k < r.x.size(); ++k) {
    if (!(r.x[k] > r.x[k - 1]) || r.cdf[k] < r.cdf[k - 1]) {
      throw std::runtime_error("reference CDF must be increasing in x and nondecreasing in cdf");
    }
  }
  return r;
}

}  // namespace lppkit
