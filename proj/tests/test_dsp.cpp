#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "pinaudio/dsp.hpp"
#include "pinaudio/error.hpp"

using namespace pinaudio;

TEST_CASE("Butterworth band-pass matches frozen scipy magnitudes") {
  // scipy.signal.butter(8, [5200, 6000], btype="band", fs=48000, output="sos"),
  // evaluated with sosfreqz.
  const auto f = design_butterworth_bandpass(16, 5200.0, 6000.0, 48000.0);
  CHECK(f.sections().size() == 8);
  struct Point { double hz, db, tol; };
  const Point pts[] = {
      {500.0, -299.09, 0.05},   {4000.0, -106.80, 0.01}, {5200.0, -3.0103, 1e-3},
      {5400.0, -3.14e-5, 1e-5}, {5600.0, 0.0, 1e-6},     {5800.0, -1.27e-4, 1e-5},
      {6000.0, -3.0103, 1e-3},  {7200.0, -90.692, 0.01}, {12000.0, -184.36, 0.05},
  };
  for (const auto& p : pts) {
    CAPTURE(p.hz);
    CHECK(std::abs(f.magnitude_db(p.hz, 48000.0) - p.db) < p.tol);
  }
}

TEST_CASE("band-pass sections are stable with zeros at DC and Nyquist") {
  const auto f = design_butterworth_bandpass(16, 5200.0, 6000.0, 48000.0);
  for (const auto& s : f.sections()) {
    // roots of z^2 + a1 z + a2 inside the unit circle
    CHECK(std::abs(s.a2) < 1.0);
    CHECK(std::abs(s.a1) < 1.0 + s.a2);
    CHECK(s.b1 == 0.0);
    CHECK(s.b2 == doctest::Approx(-s.b0));
  }
}

TEST_CASE("band-pass design rejects bad parameters") {
  CHECK_THROWS_AS(design_butterworth_bandpass(15, 5200, 6000, 48000), InvalidInput);
  CHECK_THROWS_AS(design_butterworth_bandpass(0, 5200, 6000, 48000), InvalidInput);
  CHECK_THROWS_AS(design_butterworth_bandpass(16, 6000, 5200, 48000), InvalidInput);
  CHECK_THROWS_AS(design_butterworth_bandpass(16, 5200, 24000, 48000), InvalidInput);
  CHECK_THROWS_AS(design_butterworth_bandpass(16, 0, 6000, 48000), InvalidInput);
  CHECK_THROWS_AS(design_butterworth_bandpass(16, 5200, 6000, 0), InvalidInput);
}

namespace {
double rms_tail(const std::vector<double>& y, std::size_t skip) {
  double acc = 0;
  for (std::size_t i = skip; i < y.size(); ++i) acc += y[i] * y[i];
  return std::sqrt(acc / static_cast<double>(y.size() - skip));
}
std::vector<double> tone(double hz, std::size_t n, double fs) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2 * std::numbers::pi * hz * static_cast<double>(i) / fs);
  return x;
}
}  // namespace

TEST_CASE("in-band tone passes, out-of-band tone is removed") {
  const auto f = design_butterworth_bandpass(16, 5200.0, 6000.0, 48000.0);
  const auto pass = f.apply(tone(5600.0, 48000, 48000.0));
  CHECK(rms_tail(pass, 24000) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-3));
  const auto stop = f.apply(tone(500.0, 48000, 48000.0));
  CHECK(rms_tail(stop, 24000) < 1e-9);
}

TEST_CASE("filter is linear and matches its frequency response at a tone") {
  const auto f = design_butterworth_bandpass(16, 5200.0, 6000.0, 48000.0);
  const auto x = tone(5300.0, 48000, 48000.0);
  std::vector<double> x2(x);
  for (auto& v : x2) v *= 3.0;
  const auto y = f.apply(x), y2 = f.apply(x2);
  for (std::size_t i = 0; i < y.size(); i += 997) CHECK(y2[i] == doctest::Approx(3.0 * y[i]));
  const double gain = std::abs(f.response(5300.0, 48000.0));
  CHECK(rms_tail(y, 24000) == doctest::Approx(gain * std::sqrt(0.5)).epsilon(1e-3));
}

TEST_CASE("apply on empty input") { CHECK(design_butterworth_bandpass(2, 100, 200, 1000).apply({}).empty()); }

TEST_CASE("sliding_max examples") {
  const std::vector<double> x{1, 3, 2, 0, 0, 5, 1};
  CHECK(sliding_max(x, 1) == x);
  CHECK(sliding_max(x, 3) == std::vector<double>{1, 3, 3, 3, 2, 5, 5});
  CHECK(sliding_max(x, 100) == std::vector<double>{1, 3, 3, 3, 3, 5, 5});
  CHECK(sliding_max({}, 4).empty());
  CHECK_THROWS_AS(sliding_max(x, 0), InvalidInput);
}

TEST_CASE("sliding_max agrees with the naive reference") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> len(0, 400), win(1, 60);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(len(rng));
    for (auto& v : x) v = (trial % 3 == 0) ? std::round(u(rng) * 3) : u(rng);  // some ties
    const auto w = win(rng);
    CHECK(sliding_max(x, w) == sliding_max_reference(x, w));
  }
}
