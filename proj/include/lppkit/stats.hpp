#pragma once

// Estimators used by the harness. Every reduction sorts its input first and
// accumulates with compensated summation, so row order never changes a result.

#include <cstddef>
#include <functional>
#include <vector>

namespace lppkit {

double compensated_sum(std::vector<double> v);
double mean(const std::vector<double>& v);
/// Unbiased sample variance; needs at least two values.
double variance(const std::vector<double>& v);
double binomial_stderr(double p, std::size_t trials);
double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
};

/// Ordinary least squares y = intercept + slope x. Needs two distinct x values.
LinearFit linear_regression(const std::vector<double>& x, const std::vector<double>& y);

/// Slope of log variance against log n for given variances.
LinearFit log_log_fit(const std::vector<double>& n, const std::vector<double>& var);

/// Sample variance per sweep point, then log_log_fit. Requires at least four
/// sweep points with at least `min_replicas` samples each (std::invalid_argument otherwise).
LinearFit variance_exponent_fit(const std::vector<double>& n,
                                const std::vector<std::vector<double>>& samples,
                                std::size_t min_replicas = 500);

/// sup_x |F_a(x) - F_b(x)| of the empirical CDFs. Throws on empty input.
double two_sample_ks(std::vector<double> a, std::vector<double> b);

/// sup_x |F_n(x) - F(x)| against a continuous CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Asymptotic Kolmogorov critical value c(level) / sqrt(n), e.g. level 1e-3.
double ks_critical_value(std::size_t n, double level);

struct TailTableRow {
  double r = 0.0;
  double upper = 0.0;
  double lower = 0.0;
  std::size_t count = 0;
};

/// Frequencies of {v - center >= r unit} and {v - center <= -r unit}.
std::vector<TailTableRow> tail_table(const std::vector<double>& samples, double center, double unit,
                                     const std::vector<double>& r_grid);

/// Fit of log(upper) against r over the rows with r in [r_lo, r_hi] and positive frequency.
LinearFit log_tail_fit(const std::vector<TailTableRow>& rows, double r_lo, double r_hi);

}  // namespace lppkit
