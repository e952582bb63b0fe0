#pragma once

// Labelled synthetic keystroke traces and rendered feedback-sound clips.

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pinaudio/audio.hpp"
#include "pinaudio/gamma.hpp"
#include "pinaudio/keypad.hpp"
#include "pinaudio/trace.hpp"

namespace pinaudio {

using Rng = std::mt19937_64;

struct BeepConfig {
  double frequency_hz = 5600.0;
  double duration_ms = 40.0;
  double amplitude = 0.8;
  double ramp_ms = 5.0;  // raised-cosine attack and release
};

enum class PinSource { uniform_random, fixed_list };

/// Gap means grow linearly with key distance: 200 + 200 * d ms, shape 300.
std::array<GammaParams, kNumClasses> default_single_finger_gaps();
/// Distance-independent gaps: mean 400 ms, shape 300.
GammaParams default_other_gaps();

struct GeneratorConfig {
  static constexpr int kFormatVersion = 1;

  std::uint64_t seed = 1;
  PinSource pin_source = PinSource::uniform_random;
  std::vector<Pin> pins;  // fixed_list only
  TypistMode typist_mode = TypistMode::single_finger;
  std::array<GammaParams, kNumClasses> single_finger_gaps = default_single_finger_gaps();
  GammaParams other_gaps = default_other_gaps();
  BeepConfig beep;
  bool noise = true;
  double noise_snr_db = 0.0;  // 10 log10(beep power / noise power), full band
  double sample_rate = 48000.0;
  double inter_entry_gap_ms = 3000.0;
  double pad_ms = 500.0;
  double min_gap_ms = 50.0;  // gaps are redrawn until they reach this

  void validate() const;  // throws InvalidInput
};

/// Independent stream for one trace, derived from (seed, trace_id).
Rng trace_rng(std::uint64_t seed, std::string_view trace_id);

/// Timestamps start at 0.
KeystrokeTrace sample_trace(const Pin& pin, const GeneratorConfig& cfg, Rng& rng, std::string trace_id = {});

struct RenderedClip {
  AudioClip clip;
  std::vector<double> onsets_ms;  // beep onsets in clip time
};

/// RMS of one beep over its duration.
double beep_rms(const GeneratorConfig& cfg);

/// Beeps at the trace's timestamps, shifted so the first lands pad_ms into
/// the clip, plus white Gaussian noise at the configured SNR. Throws
/// InvalidInput when two beeps would overlap.
RenderedClip render_audio(const KeystrokeTrace& trace, const GeneratorConfig& cfg, Rng& rng);

/// Beeps at explicit clip-time onsets in a clip of the given length.
AudioClip render_beeps(std::span<const double> onsets_ms, double length_ms, const GeneratorConfig& cfg, Rng& rng);

/// Several entries in one clip, inter_entry_gap_ms apart.
RenderedClip render_session(std::span<const KeystrokeTrace> traces, const GeneratorConfig& cfg, Rng& rng);

struct ClipEntry {
  std::string trace_id;
  std::string file;  // relative to the dataset directory
  Pin pin;
};

struct DatasetManifest {
  static constexpr int kFormatVersion = 1;

  GeneratorConfig config;
  std::size_t n_pins = 0;
  std::size_t entries_per_pin = 0;
  std::vector<Pin> pins;
  std::string truth_file = "truth.jsonl";
  std::vector<ClipEntry> clips;
};

/// The distinct PINs a dataset will use.
std::vector<Pin> choose_pins(const GeneratorConfig& cfg, std::size_t n_pins);

/// Trace + clip for entry `index` of the dataset (pure in cfg and index).
struct GeneratedEntry {
  KeystrokeTrace trace;  // timestamps in clip time
  AudioClip clip;
};
GeneratedEntry generate_entry(const GeneratorConfig& cfg, const Pin& pin, std::size_t index);

std::string trace_id_for(std::size_t index);

/// Writes clips/<trace_id>.wav, truth.jsonl and manifest.json under out_dir.
/// Output is byte-identical for a fixed seed. Throws DataError with path
/// context on I/O failure.
DatasetManifest generate_dataset(const GeneratorConfig& cfg, std::size_t n_pins, std::size_t entries_per_pin,
                                 const std::filesystem::path& out_dir);

}  // namespace pinaudio
