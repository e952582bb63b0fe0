#include "pinaudio/gamma.hpp"

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <string>

#include "pinaudio/error.hpp"

namespace pinaudio {

double gamma_log_pdf(const GammaParams& g, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw InvalidInput("gamma density needs a positive finite argument, got " + std::to_string(x));
  }
  return (g.shape - 1.0) * std::log(x) - x / g.scale - std::lgamma(g.shape) - g.shape * std::log(g.scale);
}

double gamma_quantile(const GammaParams& g, double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("quantile level must lie in (0, 1)");
  return boost::math::quantile(boost::math::gamma_distribution<double>(g.shape, g.scale), p);
}

GammaFit fit_gamma(std::span<const double> samples, int max_iterations) {
  const std::size_t n = samples.size();
  if (n < 2) throw DataError("gamma fit needs at least two samples");

  double sum = 0.0;
  double sum_log = 0.0;
  for (double x : samples) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw DataError("gamma fit needs positive samples, got " + std::to_string(x));
    }
    sum += x;
    sum_log += std::log(x);
  }
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(n - 1);
  if (!(var > 0.0)) throw DataError("gamma fit is degenerate: all samples identical");

  GammaFit fit;
  fit.samples = n;
  const double k_moments = mean * mean / var;
  fit.params = {k_moments, mean / k_moments};
  fit.method = FitMethod::moments;

  const double s = std::log(mean) - sum_log / static_cast<double>(n);
  if (!(s > 0.0)) return fit;  // numerically flat sample; moments are all we have

  double k = k_moments;
  for (int it = 1; it <= max_iterations; ++it) {
    const double f = std::log(k) - boost::math::digamma(k) - s;
    const double df = 1.0 / k - boost::math::trigamma(k);
    double next = k - f / df;
    if (!(next > 0.0) || !std::isfinite(next)) next = k / 2.0;
    const bool done = std::abs(next - k) <= 1e-12 * k;
    k = next;
    if (done) {
      fit.params = {k, mean / k};
      fit.method = FitMethod::mle;
      fit.iterations = it;
      return fit;
    }
  }
  fit.iterations = max_iterations;
  return fit;
}

}  // namespace pinaudio
