#include "lppkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lppkit/summation.hpp"

namespace lppkit {

double compensated_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  NeumaierSum<double> s;
  for (double x : v) s += x;
  return s.value();
}

double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean of an empty sample");
  return compensated_sum(v) / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  if (v.size() < 2) throw std::invalid_argument("variance needs at least two values");
  const double m = mean(v);
  std::vector<double> sq(v.size());
  std::transform(v.begin(), v.end(), sq.begin(), [m](double x) { return (x - m) * (x - m); });
  return compensated_sum(std::move(sq)) / static_cast<double>(v.size() - 1);
}

double binomial_stderr(double p, std::size_t trials) {
  if (trials == 0) return 0.0;
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("correlation needs paired samples");
  const double ma = mean(a), mb = mean(b);
  std::vector<double> ab(a.size()), aa(a.size()), bb(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab[k] = (a[k] - ma) * (b[k] - mb);
    aa[k] = (a[k] - ma) * (a[k] - ma);
    bb[k] = (b[k] - mb) * (b[k] - mb);
  }
  return compensated_sum(ab) / std::sqrt(compensated_sum(aa) * compensated_sum(bb));
}

LinearFit linear_regression(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("regression needs paired data");
  const double mx = mean(x), my = mean(y);
  std::vector<double> sxx(x.size()), sxy(x.size()), syy(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx[k] = (x[k] - mx) * (x[k] - mx);
    sxy[k] = (x[k] - mx) * (y[k] - my);
    syy[k] = (y[k] - my) * (y[k] - my);
  }
  const double Sxx = compensated_sum(sxx), Sxy = compensated_sum(sxy), Syy = compensated_sum(syy);
  if (!(Sxx > 0.0)) throw std::invalid_argument("regression needs two distinct x values");
  LinearFit f;
  f.slope = Sxy / Sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = Syy > 0.0 ? (Sxy * Sxy) / (Sxx * Syy) : 1.0;
  if (x.size() > 2) {
    const double rss = std::max(0.0, Syy - f.slope * Sxy);
    f.slope_stderr = std::sqrt(rss / static_cast<double>(x.size() - 2) / Sxx);
  }
  return f;
}

LinearFit log_log_fit(const std::vector<double>& n, const std::vector<double>& var) {
  if (n.size() != var.size()) throw std::invalid_argument("log-log fit needs paired data");
  std::vector<double> lx(n.size()), ly(n.size());
  for (std::size_t k = 0; k < n.size(); ++k) {
    if (!(n[k] > 0.0) || !(var[k] > 0.0)) throw std::invalid_argument("log-log fit needs positive data");
    lx[k] = std::log(n[k]);
    ly[k] = std::log(var[k]);
  }
  return linear_regression(lx, ly);
}

LinearFit variance_exponent_fit(const std::vector<double>& n,
                                const std::vector<std::vector<double>>& samples,
                                std::size_t min_replicas) {
  if (n.size() != samples.size()) throw std::invalid_argument("one sample per sweep point expected");
  if (n.size() < 4) throw std::invalid_argument("variance exponent fit needs at least four sweep points");
  std::vector<double> var;
  for (const auto& s : samples) {
    if (s.size() < std::max<std::size_t>(min_replicas, 2)) {
      throw std::invalid_argument("variance exponent fit needs more replicas per sweep point");
    }
    var.push_back(variance(s));
  }
  return log_log_fit(n, var);
}

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("two-sample KS needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("KS statistic of an empty sample");
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    const double f = cdf(sample[k]);
    d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
  }
  return d;
}

double ks_critical_value(std::size_t n, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
  return std::sqrt(-0.5 * std::log(level / 2.0)) / std::sqrt(static_cast<double>(n));
}

std::vector<TailTableRow> tail_table(const std::vector<double>& samples, double center, double unit,
                                     const std::vector<double>& r_grid) {
  if (!(unit > 0.0)) throw std::invalid_argument("tail unit must be positive");
  std::vector<TailTableRow> rows;
  const auto N = static_cast<double>(samples.size());
  for (double r : r_grid) {
    TailTableRow row;
    row.r = r;
    row.count = samples.size();
    std::size_t up = 0, down = 0;
    for (double v : samples) {
      if (v - center >= r * unit) ++up;
      if (v - center <= -r * unit) ++down;
    }
    if (!samples.empty()) {
      row.upper = static_cast<double>(up) / N;
      row.lower = static_cast<double>(down) / N;
    }
    rows.push_back(row);
  }
  return rows;
}

LinearFit log_tail_fit(const std::vector<TailTableRow>& rows, double r_lo, double r_hi) {
  std::vector<double> x, y;
  for (const auto& r : rows) {
    if (r.r >= r_lo && r.r <= r_hi && r.upper > 0.0) {
      x.push_back(r.r);
      y.push_back(std::log(r.upper));
    }
  }
  return linear_regression(x, y);
}

}  // namespace lppkit
