#include "pinaudio/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <string>

#include "pinaudio/error.hpp"

namespace pinaudio {

std::complex<double> Biquad::response(double omega) const {
  const std::complex<double> z1 = std::polar(1.0, -omega);
  const std::complex<double> z2 = z1 * z1;
  return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
}

std::vector<double> SosFilter::apply(std::span<const double> input) const {
  std::vector<double> y(input.begin(), input.end());
  for (const Biquad& s : sections_) {
    double z1 = 0.0, z2 = 0.0;
    for (double& v : y) {
      const double x = v;
      const double out = s.b0 * x + z1;
      z1 = s.b1 * x - s.a1 * out + z2;
      z2 = s.b2 * x - s.a2 * out;
      v = out;
    }
  }
  return y;
}

std::complex<double> SosFilter::response(double freq_hz, double sample_rate) const {
  const double omega = 2.0 * std::numbers::pi * freq_hz / sample_rate;
  std::complex<double> h = 1.0;
  for (const Biquad& s : sections_) h *= s.response(omega);
  return h;
}

double SosFilter::magnitude_db(double freq_hz, double sample_rate) const {
  return 20.0 * std::log10(std::abs(response(freq_hz, sample_rate)));
}

SosFilter design_butterworth_bandpass(int order, double low_hz, double high_hz, double sample_rate) {
  using cd = std::complex<double>;
  constexpr double pi = std::numbers::pi;
  if (order < 2 || order % 2 != 0) {
    throw InvalidInput("band-pass order must be even and >= 2, got " + std::to_string(order));
  }
  if (!(sample_rate > 0.0)) throw InvalidInput("sample rate must be positive");
  const double nyquist = sample_rate / 2.0;
  if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < nyquist)) {
    throw InvalidInput("passband [" + std::to_string(low_hz) + ", " + std::to_string(high_hz) +
                       "] Hz must lie inside (0, " + std::to_string(nyquist) + ")");
  }

  const int n = order / 2;  // low-pass prototype order
  const double fs2 = 2.0 * sample_rate;
  const double w_lo = fs2 * std::tan(pi * low_hz / sample_rate);
  const double w_hi = fs2 * std::tan(pi * high_hz / sample_rate);
  const double bw = w_hi - w_lo;
  const double w0sq = w_lo * w_hi;
  const double omega_center = 2.0 * std::atan(std::sqrt(w0sq) / fs2);

  // Upper-half-plane analog band-pass poles; each becomes one section with
  // its conjugate.
  std::vector<cd> analog;
  for (int k = 0; k < n; ++k) {
    const cd p = std::polar(1.0, pi * (2.0 * k + n + 1) / (2.0 * n));
    if (p.imag() < -1e-12) continue;  // conjugate handled by its partner
    const cd b = p * bw;
    const cd root = std::sqrt(b * b - 4.0 * w0sq);
    for (const cd s : {(b + root) / 2.0, (b - root) / 2.0}) {
      if (std::abs(p.imag()) <= 1e-12) {
        // Real prototype pole (odd n): its two band-pass poles are a
        // conjugate pair; keep the upper one.
        if (s.imag() < 0.0) continue;
      }
      analog.push_back(s.imag() >= 0.0 ? s : std::conj(s));
    }
  }

  std::vector<Biquad> sections;
  for (std::size_t i = 0; i < analog.size(); ++i) {
    const cd z = (fs2 + analog[i]) / (fs2 - analog[i]);
    if (std::abs(z) >= 1.0) {
      throw InvalidInput("band-pass design unstable: section " + std::to_string(i) + " has pole radius " +
                         std::to_string(std::abs(z)));
    }
    Biquad s{1.0, 0.0, -1.0, -2.0 * z.real(), std::norm(z)};
    const double g = 1.0 / std::abs(s.response(omega_center));
    s.b0 *= g;
    s.b2 *= g;
    sections.push_back(s);
  }
  return SosFilter(std::move(sections));
}

std::vector<double> sliding_max(std::span<const double> x, std::size_t window) {
  if (window == 0) throw InvalidInput("sliding window must hold at least one sample");
  std::vector<double> out(x.size());
  std::deque<std::size_t> dq;  // indices with decreasing values
  for (std::size_t i = 0; i < x.size(); ++i) {
    while (!dq.empty() && x[dq.back()] <= x[i]) dq.pop_back();
    dq.push_back(i);
    if (dq.front() + window <= i) dq.pop_front();
    out[i] = x[dq.front()];
  }
  return out;
}

std::vector<double> sliding_max_reference(std::span<const double> x, std::size_t window) {
  if (window == 0) throw InvalidInput("sliding window must hold at least one sample");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    out[i] = *std::max_element(x.begin() + static_cast<std::ptrdiff_t>(lo), x.begin() + static_cast<std::ptrdiff_t>(i) + 1);
  }
  return out;
}

}  // namespace pinaudio
