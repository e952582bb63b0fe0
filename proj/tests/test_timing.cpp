#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "pinaudio/error.hpp"
#include "pinaudio/synth.hpp"
#include "pinaudio/timing.hpp"

using namespace pinaudio;

namespace {

/// Z mean 150 ms, LD mean 600 ms, others linear in distance; shape 50.
TimingModel separated_model() {
  std::array<GammaParams, kNumClasses> p{};
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    const double mean = 150.0 + 450.0 * euclidean_distance(kAllClasses[i]) / std::sqrt(10.0);
    p[i] = {50.0, mean / 50.0};
  }
  return TimingModel::from_class_params(p, TypistMode::single_finger, "separated");
}

std::vector<KeystrokeTrace> traces_from_gamma(std::size_t n, double shape, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> dist(shape, scale);
  std::uniform_int_distribution<int> pick(0, kPinSpace - 1);
  std::vector<KeystrokeTrace> out;
  for (std::size_t i = 0; i < n; ++i) {
    KeystrokeTrace t;
    t.trace_id = "g" + std::to_string(i);
    t.pin = Pin::from_number(pick(rng));
    for (std::size_t j = 1; j < 4; ++j) t.timestamps_ms[j] = t.timestamps_ms[j - 1] + dist(rng);
    out.push_back(t);
  }
  return out;
}

std::size_t position_of(const RankedTriplets& r, const char* triplet) {
  const auto t = DistanceTriplet::parse(triplet);
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r[i].triplet == t) return i;
  return r.size();
}

}  // namespace

TEST_CASE("GapSequence validation") {
  CHECK_THROWS_AS(GapSequence({100.0, 0.0, 100.0}), InvalidInput);
  CHECK_THROWS_AS(GapSequence({100.0, -5.0, 100.0}), InvalidInput);
  CHECK(GapSequence({50.0, 200.0, 300.0}).below_normal_floor());
  CHECK_FALSE(GapSequence({150.0, 200.0, 300.0}).below_normal_floor());
  const std::vector<double> ts{0, 250, 500, 900};
  CHECK(GapSequence::from_timestamps(ts).values() == std::array<double, 3>{250, 250, 400});
}

TEST_CASE("fit_model recovers per-class gamma(4, 50) at 1000 gaps per class") {
  // Draw per-class gaps from the same gamma; the triplet of the PIN decides
  // which class each gap lands in.
  auto traces = traces_from_gamma(4000, 4.0, 50.0, 11);
  const auto report = fit_model(traces);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto& cm = report.model.classes[c];
    if (cm.samples < 1000) continue;
    CHECK_FALSE(cm.fallback);
    CHECK(std::abs(cm.params.shape / 4.0 - 1.0) < 0.10);
    CHECK(std::abs(cm.params.scale / 50.0 - 1.0) < 0.10);
  }
  CHECK(std::abs(report.model.global.mean() / 200.0 - 1.0) < 0.02);
}

TEST_CASE("fit_model: identical gaps are degenerate") {
  std::vector<KeystrokeTrace> traces(20);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    traces[i].pin = Pin::from_number(static_cast<int>(i * 37));
    traces[i].timestamps_ms = {0, 200, 400, 600};
  }
  CHECK_THROWS_AS(fit_model(traces), DataError);
}

TEST_CASE("fit_model: only U1 present falls back elsewhere") {
  const auto u1_pins = pins_of_triplet(DistanceTriplet::parse("U1,U1,U1"));
  auto traces = traces_from_gamma(300, 10.0, 30.0, 3);
  for (std::size_t i = 0; i < traces.size(); ++i) traces[i].pin = u1_pins[i % u1_pins.size()];
  const auto report = fit_model(traces);
  for (auto c : kAllClasses) {
    const auto& cm = report.model.classes[index_of(c)];
    if (c == DistanceClass::U1) {
      CHECK_FALSE(cm.fallback);
      CHECK(cm.samples == 900);
    } else {
      CHECK(cm.fallback);
      CHECK(cm.params.shape == report.model.global.shape);
      CHECK(cm.params.scale == report.model.global.scale);
    }
  }
}

TEST_CASE("fit_model errors and diagnostics") {
  std::vector<KeystrokeTrace> none;
  CHECK_THROWS_AS(fit_model(none), DataError);

  auto traces = traces_from_gamma(50, 5.0, 40.0, 9);
  traces[3].timestamps_ms = {0, 100, 100, 300};
  const auto r = fit_model(traces);
  REQUIRE(r.rejected.size() == 1);
  CHECK(r.rejected[0].trace_id == "g3");
  CHECK(r.traces_used == 49);

  // mode filter leaves nothing
  FitOptions opt;
  opt.mode_filter = TypistMode::other;
  CHECK_THROWS_AS(fit_model(traces, KeypadLayout::standard(), opt), DataError);
}

TEST_CASE("fitted mean matches the sample mean within 1% at n >= 10^4") {
  auto traces = traces_from_gamma(4000, 6.0, 45.0, 21);
  const auto report = fit_model(traces);
  double sum = 0;
  for (const auto& t : traces) sum += t.timestamps_ms[3] - t.timestamps_ms[0];
  const double sample_mean = sum / (3.0 * traces.size());
  CHECK(report.model.global_samples == 12000);
  CHECK(std::abs(report.model.global.mean() / sample_mean - 1.0) < 0.01);
}

TEST_CASE("0.1st percentile under generator defaults exceeds 100 ms") {
  GeneratorConfig cfg;
  std::vector<KeystrokeTrace> traces;
  Rng pick(4);
  std::uniform_int_distribution<int> any(0, kPinSpace - 1);
  for (int i = 0; i < 10000; ++i) {
    Rng rng = trace_rng(cfg.seed, std::to_string(i));
    traces.push_back(sample_trace(Pin::from_number(any(pick)), cfg, rng, std::to_string(i)));
  }
  const auto model = fit_model(traces).model;
  for (const auto& cm : model.classes) {
    REQUIRE_FALSE(cm.fallback);
    CHECK(gamma_quantile(cm.params, 0.001) > 100.0);
  }
  CHECK(model.distance_correlation > 0.5);
  CHECK_FALSE(model.distance_flat());
}

TEST_CASE("gap_log_likelihood") {
  const auto m = TimingModel::uniform({2.0, 100.0});
  CHECK(gap_log_likelihood(m, DistanceClass::Z, 100.0) == doctest::Approx(std::log(0.01) - 1.0));
  CHECK_THROWS_AS(gap_log_likelihood(m, DistanceClass::Z, 0.0), InvalidInput);
  for (double g : {10.0, 150.0, 999.0}) {
    CHECK(gap_log_likelihood(m, DistanceClass::U2, g) == gap_log_likelihood(m, DistanceClass::LD, g));
  }
  CHECK(std::isfinite(gap_log_likelihood(separated_model(), DistanceClass::LD, 1e-3)));
}

TEST_CASE("rank_triplets: separated model examples") {
  const auto m = separated_model();
  const auto fast = rank_triplets(m, GapSequence({150, 150, 150}));
  CHECK(fast.front().triplet.str() == "Z,Z,Z");

  const auto mixed = rank_triplets(m, GapSequence({600, 150, 600}));
  CHECK(position_of(mixed, "LD,Z,LD") < position_of(mixed, "Z,Z,Z"));
  CHECK(mixed.front().triplet.str() == "LD,Z,LD");
}

TEST_CASE("rank_triplets: indistinguishable classes give canonical order") {
  const auto r = rank_triplets(TimingModel::uniform({8.0, 30.0}), GapSequence({123, 456, 789}));
  REQUIRE(r.size() == 454);
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i - 1].triplet < r[i].triplet);
}

TEST_CASE("rank_triplets: matches a brute-force stable-sort oracle") {
  const auto m = separated_model();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> gap(60.0, 900.0);
  const auto& index = TripletIndex::standard();
  for (int trial = 0; trial < 20; ++trial) {
    const GapSequence g({gap(rng), gap(rng), gap(rng)});
    // oracle: score every feasible triplet, sort by (score desc, index asc)
    std::vector<std::pair<double, std::size_t>> oracle;
    for (std::size_t t = 0; t < kNumTriplets; ++t) {
      const auto tr = DistanceTriplet::from_index(t);
      if (index.pins(tr).empty()) continue;
      double s = 0.0;
      for (std::size_t i = 0; i < 3; ++i) s += gamma_log_pdf(m.params(tr.classes[i]), g[i]);
      oracle.emplace_back(-s, t);
    }
    std::sort(oracle.begin(), oracle.end());
    const auto ranked = rank_triplets(m, g);
    REQUIRE(ranked.size() == oracle.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) CHECK(ranked[i].triplet.index() == oracle[i].second);
  }
}

TEST_CASE("rank_triplets: complete, non-increasing, contains the true triplet") {
  const auto m = separated_model();
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> pick(0, kPinSpace - 1);
  std::uniform_real_distribution<double> gap(60.0, 900.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto truth = triplet_of_pin(Pin::from_number(pick(rng)));
    const auto r = rank_triplets(m, GapSequence({gap(rng), gap(rng), gap(rng)}));
    CHECK(r.size() == 454);
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i - 1].score >= r[i].score);
    CHECK(std::any_of(r.begin(), r.end(), [&](const ScoredTriplet& s) { return s.triplet == truth; }));
  }
}

TEST_CASE("timing model text round trip") {
  auto traces = traces_from_gamma(500, 5.0, 40.0, 12);
  FitOptions opt;
  opt.min_samples = 200;
  const auto m = fit_model(traces, KeypadLayout::standard(), opt).model;
  std::stringstream ss;
  write_model(ss, m);
  const std::string text = ss.str();
  CHECK(text.find("format_version 1") != std::string::npos);
  CHECK(text.find("class LD") != std::string::npos);
  const auto back = read_model(ss);
  CHECK(back.model_id == m.model_id);
  CHECK(back.typist_mode == m.typist_mode);
  CHECK(back.min_samples == 200);
  CHECK(back.global.shape == m.global.shape);
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    CHECK(back.classes[i].params.shape == m.classes[i].params.shape);
    CHECK(back.classes[i].params.scale == m.classes[i].params.scale);
    CHECK(back.classes[i].samples == m.classes[i].samples);
    CHECK(back.classes[i].fallback == m.classes[i].fallback);
  }
  std::stringstream again;
  write_model(again, back);
  CHECK(again.str() == text);
}

TEST_CASE("timing model reader rejects malformed input") {
  auto bad = [](const std::string& text) {
    std::istringstream in(text);
    CHECK_THROWS_AS(read_model(in), DataError);
  };
  bad("");
  bad("something else\n");
  bad("pinaudio-timing-model\nformat_version 2\n");
  bad("pinaudio-timing-model\nformat_version 1\nglobal 1 2 3\n");  // class rows missing
  bad("pinaudio-timing-model\nformat_version 1\nglobal 1 x 3\n");
  bad("pinaudio-timing-model\nformat_version 1\nwhat 1\n");
}
