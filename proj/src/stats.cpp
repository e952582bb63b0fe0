#include "pinaudio/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "pinaudio/error.hpp"

namespace pinaudio {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double median(std::span<const double> x) { return percentile(x, 50.0); }

double percentile(std::span<const double> x, double q) {
  if (x.empty()) throw InvalidInput("percentile of an empty sample");
  if (!(q >= 0.0 && q <= 100.0)) throw InvalidInput("percentile level must lie in [0, 100]");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double pos = q / 100.0 * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[hi] - s[lo]);
}

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0)) throw InvalidInput("incomplete gamma needs a > 0");
  if (x < 0.0) throw InvalidInput("incomplete gamma needs x >= 0");
  if (x == 0.0) return 1.0;
  const double log_prefix = -x + a * std::log(x) - std::lgamma(a);
  constexpr double eps = 1e-15;
  constexpr int max_iter = 1000;

  if (x < a + 1.0) {
    // P(a, x) = e^-x x^a / Gamma(a+1) * sum x^n / ((a+1)...(a+n))
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < max_iter; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * eps) break;
    }
    return std::max(0.0, 1.0 - sum * std::exp(log_prefix));
  }

  // Modified Lentz for the continued fraction of Q(a, x).
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < max_iter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  return std::exp(log_prefix) * h;
}

double chi_square_sf(double statistic, double dof) {
  if (!(dof > 0.0)) throw InvalidInput("chi-square needs positive degrees of freedom");
  if (statistic <= 0.0) return 1.0;
  return regularized_gamma_q(dof / 2.0, statistic / 2.0);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

ChiSquareResult chi_square_2x2(std::size_t hits_a, std::size_t n_a, std::size_t hits_b, std::size_t n_b,
                               bool yates) {
  if (hits_a > n_a || hits_b > n_b) throw InvalidInput("hit count exceeds trial count");
  if (n_a == 0 || n_b == 0) throw InvalidInput("chi-square needs trials in both conditions");
  const double a = static_cast<double>(hits_a);
  const double b = static_cast<double>(n_a - hits_a);
  const double c = static_cast<double>(hits_b);
  const double d = static_cast<double>(n_b - hits_b);
  const double n = a + b + c + d;
  const double r1 = a + b, r2 = c + d, c1 = a + c, c2 = b + d;

  ChiSquareResult res;
  for (double row : {r1, r2})
    for (double col : {c1, c2})
      if (row * col / n < 5.0) res.low_expected = true;

  if (c1 == 0.0 || c2 == 0.0) return res;  // no variation: statistic 0, p 1
  double diff = std::abs(a * d - b * c);
  if (yates) diff = std::max(0.0, diff - n / 2.0);
  res.statistic = n * diff * diff / (r1 * r2 * c1 * c2);
  res.p_value = chi_square_sf(res.statistic, 1.0);
  return res;
}

AndersonDarlingResult anderson_darling(std::span<const double> residuals) {
  const std::size_t n = residuals.size();
  if (n < 8) throw InvalidInput("Anderson-Darling needs at least 8 values, got " + std::to_string(n));
  const double m = mean(residuals);
  const double s = stddev(residuals);
  if (!(s > 0.0)) throw DataError("Anderson-Darling: zero variance");

  std::vector<double> z(residuals.begin(), residuals.end());
  std::sort(z.begin(), z.end());
  const double nn = static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double zi = (z[i] - m) / s;
    const double zj = (z[n - 1 - i] - m) / s;
    // log F(zi) and log(1 - F(zj)) via erfc keeps the tails accurate
    const double log_f = std::log(std::max(normal_cdf(zi), std::numeric_limits<double>::min()));
    const double log_sf = std::log(std::max(normal_cdf(-zj), std::numeric_limits<double>::min()));
    sum += (2.0 * static_cast<double>(i) + 1.0) * (log_f + log_sf);
  }
  AndersonDarlingResult r;
  r.a2 = -nn - sum / nn;
  r.a2_star = r.a2 * (1.0 + 0.75 / nn + 2.25 / (nn * nn));
  r.reject_1pct = r.a2_star > kAndersonDarlingCritical1pct;
  return r;
}

}  // namespace pinaudio
