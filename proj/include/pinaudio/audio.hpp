#pragma once

// Keystroke detection from PIN-pad feedback sounds: normalisation,
// Butterworth band-pass, amplitude gate, sliding-max envelope, onset picking.

#include <cstddef>
#include <span>
#include <vector>

#include "pinaudio/dsp.hpp"
#include "pinaudio/trace.hpp"

namespace pinaudio {

struct AudioClip {
  double sample_rate = 48000.0;
  std::vector<double> samples;

  double duration_ms() const { return 1000.0 * static_cast<double>(samples.size()) / sample_rate; }
};

struct PipelineConfig {
  double sample_rate = 48000.0;
  int filter_order = 16;
  double center_freq_hz = 5600.0;
  double bandwidth_hz = 800.0;
  double gate_threshold = 0.01;
  std::size_t window_samples = 4800;
  double min_separation_ms = 100.0;
  double match_tolerance_ms = 25.0;
  // Event level = floor + peak_fraction * (max - floor), floor = median envelope.
  double peak_fraction = 0.3;
  // An event's peak must reach min_contrast * floor.
  double min_contrast = 1.8;
  // Silence longer than this separates two PIN entries.
  double entry_gap_ms = 1500.0;

  /// Defaults with the window set to one tenth of a second.
  static PipelineConfig for_rate(double sample_rate);

  double low_edge_hz() const { return center_freq_hz - bandwidth_hz / 2.0; }
  double high_edge_hz() const { return center_freq_hz + bandwidth_hz / 2.0; }

  void validate() const;  // throws InvalidInput
};

/// Scale by 1 / max|x|. Throws InvalidInput on an empty clip and DataError
/// on an all-zero clip.
AudioClip normalize(const AudioClip& clip);

SosFilter make_bandpass(const PipelineConfig& cfg);
AudioClip bandpass(const AudioClip& clip, const PipelineConfig& cfg);

/// |x| with values below the gate zeroed, then the trailing sliding maximum
/// over cfg.window_samples. Length preserved.
AudioClip gate_and_envelope(const AudioClip& clip, const PipelineConfig& cfg);

struct DetectionResult {
  std::vector<double> timestamps_ms;  // onsets, strictly increasing
  std::vector<double> peak_levels;    // envelope maximum of each event
  double floor = 0.0;
  double level = 0.0;
  std::vector<double> envelope;  // filled only on request
  PipelineConfig config;
};

/// normalize -> bandpass -> gate_and_envelope -> onset of each envelope
/// event. Silence yields an empty result. Throws InvalidInput if the clip's
/// sample rate differs from cfg.sample_rate.
DetectionResult detect_keystrokes(const AudioClip& clip, const PipelineConfig& cfg, bool keep_envelope = false);

struct Match {
  std::size_t truth_index = 0;
  std::size_t detected_index = 0;
  double error_ms = 0.0;  // detected - truth
};

struct MatchReport {
  std::size_t truth_count = 0;
  std::size_t detected_count = 0;
  std::size_t misses = 0;
  std::size_t false_positives = 0;
  double detection_rate = 0.0;
  std::vector<Match> matches;  // sorted by truth index
  double mean_error_ms = 0.0;
  double std_error_ms = 0.0;
  double p75_abs_error_ms = 0.0;
  double p97_abs_error_ms = 0.0;
};

/// Greedy nearest-first pairing within `tolerance_ms`. Throws InvalidInput
/// on empty truth.
MatchReport match_ground_truth(std::span<const double> detected_ms, std::span<const double> truth_ms,
                               double tolerance_ms);
MatchReport match_ground_truth(const DetectionResult& detected, std::span<const double> truth_ms,
                               double tolerance_ms);

/// Split at silences longer than entry_gap_ms.
std::vector<std::vector<double>> segment_entries(std::span<const double> timestamps_ms, double entry_gap_ms);

/// One GapSequence per 4-press entry. Throws DataError listing group sizes
/// when any group does not hold exactly 4 presses.
std::vector<GapSequence> gaps_from_detection(const DetectionResult& detected);
std::vector<GapSequence> gaps_from_timestamps(std::span<const double> timestamps_ms, double entry_gap_ms);

}  // namespace pinaudio
