#pragma once

#include <cstddef>
#include <span>

namespace pinaudio {

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1); 0 for fewer than two values.
double stddev(std::span<const double> x);
double median(std::span<const double> x);
/// Linear-interpolated percentile, q in [0, 100]. Throws on empty input.
double percentile(std::span<const double> x, double q);

/// Regularized upper incomplete gamma Q(a, x): power series for x < a + 1,
/// Lentz continued fraction otherwise.
double regularized_gamma_q(double a, double x);

/// Survival function of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

double normal_cdf(double z);

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool low_expected = false;  // some expected cell count below 5
};

/// 2x2 contingency test (hits vs misses, condition a vs b), 1 dof.
/// With `yates` the continuity correction is applied.
ChiSquareResult chi_square_2x2(std::size_t hits_a, std::size_t n_a, std::size_t hits_b, std::size_t n_b,
                               bool yates = true);

struct AndersonDarlingResult {
  double a2 = 0.0;         // raw statistic
  double a2_star = 0.0;    // A^2 (1 + 0.75/n + 2.25/n^2)
  bool reject_1pct = false;
};

/// Normality test with mean and variance estimated from the sample.
inline constexpr double kAndersonDarlingCritical1pct = 1.035;

/// Throws InvalidInput for n < 8 and DataError for zero variance.
AndersonDarlingResult anderson_darling(std::span<const double> residuals);

}  // namespace pinaudio
