#include "pinaudio/audio.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "pinaudio/error.hpp"
#include "pinaudio/stats.hpp"

namespace pinaudio {

PipelineConfig PipelineConfig::for_rate(double sample_rate) {
  PipelineConfig cfg;
  cfg.sample_rate = sample_rate;
  cfg.window_samples = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(sample_rate / 10.0)));
  return cfg;
}

void PipelineConfig::validate() const {
  if (!(sample_rate > 0.0)) throw InvalidInput("sample_rate must be positive");
  if (filter_order < 2 || filter_order % 2 != 0) throw InvalidInput("filter_order must be even and >= 2");
  if (!(gate_threshold > 0.0 && gate_threshold < 1.0)) throw InvalidInput("gate_threshold must lie in (0, 1)");
  if (window_samples < 1) throw InvalidInput("window_samples must be >= 1");
  if (!(bandwidth_hz > 0.0) || !(low_edge_hz() > 0.0) || !(high_edge_hz() < sample_rate / 2.0)) {
    throw InvalidInput("passband must lie inside (0, Nyquist)");
  }
  if (!(min_separation_ms >= 0.0)) throw InvalidInput("min_separation_ms must be >= 0");
  if (!(match_tolerance_ms > 0.0)) throw InvalidInput("match_tolerance_ms must be positive");
  if (!(peak_fraction > 0.0 && peak_fraction < 1.0)) throw InvalidInput("peak_fraction must lie in (0, 1)");
  if (!(min_contrast >= 1.0)) throw InvalidInput("min_contrast must be >= 1");
  if (!(entry_gap_ms > 0.0)) throw InvalidInput("entry_gap_ms must be positive");
}

AudioClip normalize(const AudioClip& clip) {
  if (clip.samples.empty()) throw InvalidInput("cannot normalise an empty clip");
  double peak = 0.0;
  for (double v : clip.samples) peak = std::max(peak, std::abs(v));
  if (!(peak > 0.0)) throw DataError("cannot normalise an all-zero clip: no signal");
  AudioClip out{clip.sample_rate, clip.samples};
  const double inv = 1.0 / peak;
  for (double& v : out.samples) v *= inv;
  return out;
}

SosFilter make_bandpass(const PipelineConfig& cfg) {
  return design_butterworth_bandpass(cfg.filter_order, cfg.low_edge_hz(), cfg.high_edge_hz(), cfg.sample_rate);
}

AudioClip bandpass(const AudioClip& clip, const PipelineConfig& cfg) {
  PipelineConfig at_rate = cfg;
  at_rate.sample_rate = clip.sample_rate;
  return AudioClip{clip.sample_rate, make_bandpass(at_rate).apply(clip.samples)};
}

AudioClip gate_and_envelope(const AudioClip& clip, const PipelineConfig& cfg) {
  std::vector<double> gated(clip.samples.size());
  std::transform(clip.samples.begin(), clip.samples.end(), gated.begin(), [&](double v) {
    const double a = std::abs(v);
    return a < cfg.gate_threshold ? 0.0 : a;
  });
  return AudioClip{clip.sample_rate, sliding_max(gated, cfg.window_samples)};
}

DetectionResult detect_keystrokes(const AudioClip& clip, const PipelineConfig& cfg, bool keep_envelope) {
  cfg.validate();
  if (std::abs(clip.sample_rate - cfg.sample_rate) > 1e-9) {
    throw InvalidInput("clip sample rate " + std::to_string(clip.sample_rate) +
                       " Hz does not match pipeline rate " + std::to_string(cfg.sample_rate) + " Hz");
  }
  DetectionResult result;
  result.config = cfg;
  if (clip.samples.empty() ||
      std::all_of(clip.samples.begin(), clip.samples.end(), [](double v) { return v == 0.0; })) {
    if (keep_envelope) result.envelope.assign(clip.samples.size(), 0.0);
    return result;
  }

  const AudioClip env = gate_and_envelope(bandpass(normalize(clip), cfg), cfg);
  const std::vector<double>& e = env.samples;
  const double top = *std::max_element(e.begin(), e.end());
  if (top > 0.0) {
    result.floor = median(e);
    result.level = result.floor + cfg.peak_fraction * (top - result.floor);
    const double ms_per_sample = 1000.0 / cfg.sample_rate;

    // (onset ms, peak) of every run above the level that clears the floor contrast
    std::vector<std::pair<double, double>> events;
    std::size_t i = 0;
    while (i < e.size()) {
      if (e[i] < result.level) {
        ++i;
        continue;
      }
      const std::size_t start = i;
      double peak = 0.0;
      while (i < e.size() && e[i] >= result.level) peak = std::max(peak, e[i++]);
      if (peak >= cfg.min_contrast * result.floor) {
        events.emplace_back(static_cast<double>(start) * ms_per_sample, peak);
      }
    }

    for (const auto& [t, peak] : events) {
      if (!result.timestamps_ms.empty() && t - result.timestamps_ms.back() < cfg.min_separation_ms) {
        if (peak > result.peak_levels.back()) {
          result.timestamps_ms.back() = t;
          result.peak_levels.back() = peak;
        }
        continue;
      }
      result.timestamps_ms.push_back(t);
      result.peak_levels.push_back(peak);
    }
  }
  if (keep_envelope) result.envelope = e;
  return result;
}

MatchReport match_ground_truth(std::span<const double> detected, std::span<const double> truth, double tolerance_ms) {
  if (truth.empty()) throw InvalidInput("ground truth must not be empty");
  MatchReport r;
  r.truth_count = truth.size();
  r.detected_count = detected.size();

  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t t = 0; t < truth.size(); ++t)
    for (std::size_t d = 0; d < detected.size(); ++d) {
      const double err = std::abs(detected[d] - truth[t]);
      if (err <= tolerance_ms) pairs.emplace_back(err, t, d);
    }
  std::sort(pairs.begin(), pairs.end());
  std::vector<bool> used_t(truth.size()), used_d(detected.size());
  for (const auto& [err, t, d] : pairs) {
    if (used_t[t] || used_d[d]) continue;
    used_t[t] = used_d[d] = true;
    r.matches.push_back({t, d, detected[d] - truth[t]});
  }
  std::sort(r.matches.begin(), r.matches.end(),
            [](const Match& a, const Match& b) { return a.truth_index < b.truth_index; });

  r.misses = truth.size() - r.matches.size();
  r.false_positives = detected.size() - r.matches.size();
  r.detection_rate = static_cast<double>(r.matches.size()) / static_cast<double>(truth.size());
  if (!r.matches.empty()) {
    std::vector<double> errs, abs_errs;
    for (const auto& m : r.matches) {
      errs.push_back(m.error_ms);
      abs_errs.push_back(std::abs(m.error_ms));
    }
    r.mean_error_ms = mean(errs);
    r.std_error_ms = stddev(errs);
    r.p75_abs_error_ms = percentile(abs_errs, 75.0);
    r.p97_abs_error_ms = percentile(abs_errs, 97.0);
  }
  return r;
}

MatchReport match_ground_truth(const DetectionResult& detected, std::span<const double> truth, double tolerance_ms) {
  return match_ground_truth(detected.timestamps_ms, truth, tolerance_ms);
}

std::vector<std::vector<double>> segment_entries(std::span<const double> ts, double entry_gap_ms) {
  std::vector<std::vector<double>> groups;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i == 0 || ts[i] - ts[i - 1] > entry_gap_ms) groups.emplace_back();
    groups.back().push_back(ts[i]);
  }
  return groups;
}

std::vector<GapSequence> gaps_from_timestamps(std::span<const double> ts, double entry_gap_ms) {
  const auto groups = segment_entries(ts, entry_gap_ms);
  bool ok = !groups.empty();
  std::string sizes;
  for (const auto& g : groups) {
    if (!sizes.empty()) sizes += ',';
    sizes += std::to_string(g.size());
    if (g.size() != kPinLength) ok = false;
  }
  if (!ok) throw DataError("segmentation error: expected groups of 4 presses, got sizes [" + sizes + "]");
  std::vector<GapSequence> out;
  for (const auto& g : groups) out.push_back(GapSequence::from_timestamps(g));
  return out;
}

std::vector<GapSequence> gaps_from_detection(const DetectionResult& detected) {
  return gaps_from_timestamps(detected.timestamps_ms, detected.config.entry_gap_ms);
}

}  // namespace pinaudio
