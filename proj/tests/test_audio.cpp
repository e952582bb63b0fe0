#include <cmath>

#include "doctest.h"
#include "pinaudio/audio.hpp"
#include "pinaudio/error.hpp"
#include "pinaudio/synth.hpp"

using namespace pinaudio;

namespace {

GeneratorConfig clean_config() {
  GeneratorConfig cfg;
  cfg.noise = false;
  return cfg;
}

KeystrokeTrace fixed_trace(const std::string& pin, std::array<double, 4> ts) {
  KeystrokeTrace t;
  t.trace_id = "fixed";
  t.pin = Pin::parse(pin);
  t.timestamps_ms = ts;
  return t;
}

}  // namespace

TEST_CASE("normalize examples") {
  const auto n = normalize(AudioClip{8000.0, {0.5, -2.0, 1.0}});
  CHECK(n.samples == std::vector<double>{0.25, -1.0, 0.5});
  CHECK(n.sample_rate == 8000.0);
  CHECK(normalize(AudioClip{48000.0, {0.5, -0.25}}).samples == std::vector<double>{1.0, -0.5});
  CHECK(normalize(n).samples == n.samples);
  CHECK(normalize(AudioClip{48000.0, {0.2, 0.2, 0.2}}).samples == std::vector<double>{1.0, 1.0, 1.0});
  CHECK_THROWS_AS(normalize(AudioClip{48000.0, {}}), InvalidInput);
  CHECK_THROWS_AS(normalize(AudioClip{48000.0, {0.0, 0.0}}), DataError);
}

TEST_CASE("gate_and_envelope examples") {
  PipelineConfig cfg;
  cfg.window_samples = 3;
  const auto e = gate_and_envelope(AudioClip{48000.0, {0.005, -0.5, 0.009, 0.0, 0.2, -0.001, 0.0}}, cfg);
  CHECK(e.samples == std::vector<double>{0.0, 0.5, 0.5, 0.5, 0.2, 0.2, 0.2});
}

TEST_CASE("PipelineConfig validation") {
  PipelineConfig ok;
  CHECK_NOTHROW(ok.validate());
  auto bad = [](auto mutate) {
    PipelineConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), InvalidInput);
  };
  bad([](PipelineConfig& c) { c.filter_order = 7; });
  bad([](PipelineConfig& c) { c.gate_threshold = 0.0; });
  bad([](PipelineConfig& c) { c.window_samples = 0; });
  bad([](PipelineConfig& c) { c.center_freq_hz = 23900.0; });
  bad([](PipelineConfig& c) { c.peak_fraction = 1.0; });
  bad([](PipelineConfig& c) { c.min_contrast = 0.5; });
  CHECK(PipelineConfig::for_rate(44100.0).window_samples == 4410);
}

TEST_CASE("detect_keystrokes on a clean clip lands within 5 ms") {
  const auto cfg = clean_config();
  Rng rng(1);
  const auto r = render_audio(fixed_trace("1590", {0, 400, 900, 1250}), cfg, rng);
  const auto det = detect_keystrokes(r.clip, PipelineConfig{});
  REQUIRE(det.timestamps_ms.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(det.timestamps_ms[i] - r.onsets_ms[i]) <= 5.0);
  const auto gaps = gaps_from_detection(det);
  REQUIRE(gaps.size() == 1);
  CHECK(std::abs(gaps[0][0] - 400.0) < 1.0);
  CHECK(std::abs(gaps[0][1] - 500.0) < 1.0);
  CHECK(std::abs(gaps[0][2] - 350.0) < 1.0);
}

TEST_CASE("detect_keystrokes on silence and pure noise") {
  const PipelineConfig pc;
  const auto silent = detect_keystrokes(AudioClip{48000.0, std::vector<double>(48000, 0.0)}, pc, true);
  CHECK(silent.timestamps_ms.empty());
  CHECK(silent.envelope.size() == 48000);
  CHECK(detect_keystrokes(AudioClip{48000.0, {}}, pc).timestamps_ms.empty());

  GeneratorConfig cfg;  // noise on, 0 dB
  Rng rng(3);
  const auto noise = render_beeps({}, 3000.0, cfg, rng);
  const auto det = detect_keystrokes(noise, pc);
  CHECK(det.timestamps_ms.empty());
  CHECK_THROWS_AS(gaps_from_detection(det), DataError);
}

TEST_CASE("detect_keystrokes at 0 dB SNR within 25 ms") {
  const GeneratorConfig cfg;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto r = render_audio(fixed_trace("2580", {0, 350, 700, 1050}), cfg, rng);
    const auto det = detect_keystrokes(r.clip, PipelineConfig{});
    const auto rep = match_ground_truth(det, r.onsets_ms, 25.0);
    CAPTURE(seed);
    CHECK(rep.misses == 0);
    CHECK(rep.false_positives == 0);
  }
}

TEST_CASE("detect_keystrokes: deterministic, scale invariant, shift equivariant") {
  const GeneratorConfig cfg;
  Rng rng(12);
  const auto r = render_audio(fixed_trace("1379", {0, 600, 1100, 1500}), cfg, rng);
  const PipelineConfig pc;
  const auto a = detect_keystrokes(r.clip, pc);
  CHECK(detect_keystrokes(r.clip, pc).timestamps_ms == a.timestamps_ms);

  AudioClip scaled = r.clip;
  for (double& v : scaled.samples) v *= 0.01;
  CHECK(detect_keystrokes(scaled, pc).timestamps_ms == a.timestamps_ms);

  // prepend 0.25 s of silence to a clean clip
  const auto cfg_clean = clean_config();
  Rng rng_clean(12);
  const auto rc = render_audio(fixed_trace("1379", {0, 600, 1100, 1500}), cfg_clean, rng_clean);
  const auto c = detect_keystrokes(rc.clip, pc);
  AudioClip shifted = rc.clip;
  shifted.samples.insert(shifted.samples.begin(), 12000, 0.0);
  const auto b = detect_keystrokes(shifted, pc);
  REQUIRE(b.timestamps_ms.size() == c.timestamps_ms.size());
  for (std::size_t i = 0; i < c.timestamps_ms.size(); ++i)
    CHECK(std::abs(b.timestamps_ms[i] - c.timestamps_ms[i] - 250.0) <= 1.0);
}

TEST_CASE("detect_keystrokes rejects a sample-rate mismatch") {
  CHECK_THROWS_AS(detect_keystrokes(AudioClip{44100.0, {0.1, 0.2}}, PipelineConfig{}), InvalidInput);
}

TEST_CASE("match_ground_truth examples") {
  const std::vector<double> truth{100, 400, 800};
  const auto r = match_ground_truth(std::vector<double>{103, 390, 700, 1200}, truth, 25.0);
  CHECK(r.truth_count == 3);
  CHECK(r.detected_count == 4);
  REQUIRE(r.matches.size() == 2);
  CHECK(r.matches[0].error_ms == 3.0);
  CHECK(r.matches[1].error_ms == -10.0);
  CHECK(r.misses == 1);
  CHECK(r.false_positives == 2);
  CHECK(r.detection_rate == doctest::Approx(2.0 / 3.0));
  CHECK(r.mean_error_ms == doctest::Approx(-3.5));

  // greedy nearest-first: 110 belongs to 105, not 100
  const auto g = match_ground_truth(std::vector<double>{110}, std::vector<double>{100, 105}, 25.0);
  REQUIRE(g.matches.size() == 1);
  CHECK(g.matches[0].truth_index == 1);

  CHECK_THROWS_AS(match_ground_truth(std::vector<double>{1}, std::vector<double>{}, 25.0), InvalidInput);
  CHECK(match_ground_truth(std::vector<double>{}, truth, 25.0).detection_rate == 0.0);
}

TEST_CASE("segment_entries and gaps_from_timestamps") {
  const std::vector<double> ts{0, 200, 500, 700, 3000, 3300, 3500, 3900};
  const auto groups = segment_entries(ts, 1500.0);
  REQUIRE(groups.size() == 2);
  CHECK(groups[1].front() == 3000.0);
  const auto gaps = gaps_from_timestamps(ts, 1500.0);
  CHECK(gaps[1].values() == std::array<double, 3>{300, 200, 400});

  try {
    gaps_from_timestamps(std::vector<double>{0, 200, 500, 3000, 3200, 3400, 3600, 3800}, 1500.0);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("[3,5]") != std::string::npos);
  }
}

TEST_CASE("session of several entries segments back into traces") {
  const GeneratorConfig cfg;
  std::vector<KeystrokeTrace> traces;
  for (int i = 0; i < 5; ++i) {
    Rng r = trace_rng(cfg.seed, std::to_string(i));
    traces.push_back(sample_trace(Pin::from_number(1000 * i + 123), cfg, r));
  }
  Rng rng(9);
  const auto session = render_session(traces, cfg, rng);
  const auto det = detect_keystrokes(session.clip, PipelineConfig{});
  const auto gaps = gaps_from_detection(det);
  REQUIRE(gaps.size() == traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(gaps[i][j] - traces[i].gaps()[j]) < 10.0);
}
