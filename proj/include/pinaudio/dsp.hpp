#pragma once

// Filter design and the envelope kernels used by the keystroke detector.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace pinaudio {

/// y = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  std::complex<double> response(double omega) const;
};

/// Cascade of second-order sections, run in transposed direct form II.
class SosFilter {
 public:
  SosFilter() = default;
  explicit SosFilter(std::vector<Biquad> sections) : sections_(std::move(sections)) {}

  const std::vector<Biquad>& sections() const { return sections_; }

  std::vector<double> apply(std::span<const double> input) const;

  std::complex<double> response(double freq_hz, double sample_rate) const;
  double magnitude_db(double freq_hz, double sample_rate) const;

 private:
  std::vector<Biquad> sections_;
};

/// Digital Butterworth band-pass of total order `order` (even), realised as
/// order/2 sections. Band edges are pre-warped before the bilinear transform
/// and every section has unit gain at the band centre. Throws InvalidInput
/// on a bad order or band, or when a section comes out unstable.
SosFilter design_butterworth_bandpass(int order, double low_hz, double high_hz, double sample_rate);

/// Trailing sliding maximum: out[i] = max(x[max(0, i-window+1) .. i]).
/// Monotonic deque, O(n).
std::vector<double> sliding_max(std::span<const double> x, std::size_t window);

/// O(n * window) reference for sliding_max.
std::vector<double> sliding_max_reference(std::span<const double> x, std::size_t window);

}  // namespace pinaudio
