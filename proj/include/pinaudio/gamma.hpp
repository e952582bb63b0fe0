#pragma once

#include <cstddef>
#include <span>

namespace pinaudio {

/// Gamma distribution with shape k and scale theta (milliseconds here).
struct GammaParams {
  double shape = 1.0;
  double scale = 1.0;

  double mean() const { return shape * scale; }
  double variance() const { return shape * scale * scale; }
};

/// Log-density; x must be > 0 (throws InvalidInput otherwise).
double gamma_log_pdf(const GammaParams& g, double x);

/// Inverse CDF, p in (0, 1).
double gamma_quantile(const GammaParams& g, double p);

enum class FitMethod { mle, moments };

struct GammaFit {
  GammaParams params;
  FitMethod method = FitMethod::mle;
  int iterations = 0;
  std::size_t samples = 0;
};

/// Maximum-likelihood fit: moment estimate as the starting point, Newton
/// iterations on the shape equation ln k - digamma(k) = ln(mean) - mean(ln x).
/// Falls back to the moment estimate when Newton does not converge within
/// `max_iterations`. Throws DataError on fewer than two samples, a
/// non-positive sample, or zero sample variance.
GammaFit fit_gamma(std::span<const double> samples, int max_iterations = 50);

}  // namespace pinaudio
