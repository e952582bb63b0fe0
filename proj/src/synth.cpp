#include "pinaudio/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "pinaudio/batch.hpp"
#include "pinaudio/error.hpp"
#include "pinaudio/records.hpp"
#include "pinaudio/util.hpp"
#include "pinaudio/wav.hpp"

namespace pinaudio {
namespace {

constexpr double kDefaultShape = 300.0;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t to_samples(double ms, double rate) { return static_cast<std::size_t>(std::llround(ms * rate / 1000.0)); }

std::vector<double> beep_waveform(const GeneratorConfig& cfg) {
  const auto& b = cfg.beep;
  const std::size_t n = to_samples(b.duration_ms, cfg.sample_rate);
  const std::size_t ramp = std::min(to_samples(b.ramp_ms, cfg.sample_rate), n / 2);
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) {
    double env = 1.0;
    if (ramp > 0 && j < ramp) env = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(j) / ramp));
    if (ramp > 0 && j >= n - ramp) {
      env = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(n - 1 - j) / ramp));
    }
    w[j] = b.amplitude * env * std::sin(2.0 * std::numbers::pi * b.frequency_hz * static_cast<double>(j) / cfg.sample_rate);
  }
  return w;
}

}  // namespace

std::array<GammaParams, kNumClasses> default_single_finger_gaps() {
  std::array<GammaParams, kNumClasses> out{};
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    const double mean = 200.0 + 200.0 * euclidean_distance(kAllClasses[i]);
    out[i] = {kDefaultShape, mean / kDefaultShape};
  }
  return out;
}

GammaParams default_other_gaps() { return {kDefaultShape, 400.0 / kDefaultShape}; }

void GeneratorConfig::validate() const {
  auto positive = [](const GammaParams& g) { return g.shape > 0.0 && g.scale > 0.0; };
  if (!std::all_of(single_finger_gaps.begin(), single_finger_gaps.end(), positive) || !positive(other_gaps)) {
    throw InvalidInput("gamma parameters must be positive");
  }
  if (typist_mode == TypistMode::mixed) throw InvalidInput("generator typist mode must be single_finger or other");
  if (!(sample_rate > 0.0)) throw InvalidInput("sample_rate must be positive");
  if (!(beep.frequency_hz > 0.0 && beep.frequency_hz < sample_rate / 2.0)) {
    throw InvalidInput("beep frequency must lie below Nyquist");
  }
  if (!(beep.duration_ms > 0.0) || !(beep.amplitude > 0.0) || beep.ramp_ms < 0.0) {
    throw InvalidInput("beep duration and amplitude must be positive");
  }
  double min_mean = other_gaps.mean();
  for (const auto& g : single_finger_gaps) min_mean = std::min(min_mean, g.mean());
  if (!(beep.duration_ms < min_mean)) throw InvalidInput("beep duration must be shorter than every mean gap");
  if (!(min_gap_ms >= 0.0) || !(pad_ms >= 0.0) || !(inter_entry_gap_ms > 0.0)) {
    throw InvalidInput("padding and gap settings must be non-negative");
  }
  if (!std::isfinite(noise_snr_db)) throw InvalidInput("noise_snr_db must be finite");
  if (pin_source == PinSource::fixed_list && pins.empty()) throw InvalidInput("fixed_list needs at least one PIN");
}

Rng trace_rng(std::uint64_t seed, std::string_view trace_id) {
  return Rng(splitmix64(seed ^ splitmix64(fnv1a64(trace_id))));
}

KeystrokeTrace sample_trace(const Pin& pin, const GeneratorConfig& cfg, Rng& rng, std::string trace_id) {
  KeystrokeTrace tr;
  tr.trace_id = std::move(trace_id);
  tr.pin = pin;
  tr.mode = cfg.typist_mode;
  const auto triplet = triplet_of_pin(pin);
  double t = 0.0;
  tr.timestamps_ms[0] = t;
  for (std::size_t i = 0; i < 3; ++i) {
    const GammaParams& g = cfg.typist_mode == TypistMode::single_finger
                               ? cfg.single_finger_gaps[index_of(triplet.classes[i])]
                               : cfg.other_gaps;
    std::gamma_distribution<double> dist(g.shape, g.scale);
    double gap = dist(rng);
    while (gap < cfg.min_gap_ms) gap = dist(rng);
    t += gap;
    tr.timestamps_ms[i + 1] = t;
  }
  return tr;
}

double beep_rms(const GeneratorConfig& cfg) {
  const auto w = beep_waveform(cfg);
  const double power = std::inner_product(w.begin(), w.end(), w.begin(), 0.0) / static_cast<double>(w.size());
  return std::sqrt(power);
}

AudioClip render_beeps(std::span<const double> onsets_ms, double length_ms, const GeneratorConfig& cfg, Rng& rng) {
  for (std::size_t i = 1; i < onsets_ms.size(); ++i) {
    if (onsets_ms[i] - onsets_ms[i - 1] < cfg.beep.duration_ms) {
      throw InvalidInput("beeps overlap: onsets " + std::to_string(onsets_ms[i - 1]) + " and " +
                         std::to_string(onsets_ms[i]) + " ms are closer than the beep duration");
    }
  }
  AudioClip clip;
  clip.sample_rate = cfg.sample_rate;
  clip.samples.assign(to_samples(length_ms, cfg.sample_rate), 0.0);
  const auto beep = beep_waveform(cfg);
  for (double onset : onsets_ms) {
    if (onset < 0.0) throw InvalidInput("beep onset before clip start");
    const std::size_t start = to_samples(onset, cfg.sample_rate);
    if (start + beep.size() > clip.samples.size()) throw InvalidInput("beep extends past clip end");
    for (std::size_t j = 0; j < beep.size(); ++j) clip.samples[start + j] += beep[j];
  }
  if (cfg.noise) {
    const double sigma = beep_rms(cfg) / std::pow(10.0, cfg.noise_snr_db / 20.0);
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& v : clip.samples) v += noise(rng);
  }
  return clip;
}

RenderedClip render_audio(const KeystrokeTrace& trace, const GeneratorConfig& cfg, Rng& rng) {
  RenderedClip out;
  const double t0 = trace.timestamps_ms[0];
  for (double t : trace.timestamps_ms) out.onsets_ms.push_back(cfg.pad_ms + (t - t0));
  const double length = out.onsets_ms.back() + cfg.beep.duration_ms + cfg.pad_ms;
  out.clip = render_beeps(out.onsets_ms, length, cfg, rng);
  return out;
}

RenderedClip render_session(std::span<const KeystrokeTrace> traces, const GeneratorConfig& cfg, Rng& rng) {
  RenderedClip out;
  double cursor = cfg.pad_ms;
  for (const auto& tr : traces) {
    const double t0 = tr.timestamps_ms[0];
    for (double t : tr.timestamps_ms) out.onsets_ms.push_back(cursor + (t - t0));
    cursor = out.onsets_ms.back() + cfg.inter_entry_gap_ms;
  }
  const double length = (out.onsets_ms.empty() ? cfg.pad_ms : out.onsets_ms.back() + cfg.beep.duration_ms) + cfg.pad_ms;
  out.clip = render_beeps(out.onsets_ms, length, cfg, rng);
  return out;
}

std::vector<Pin> choose_pins(const GeneratorConfig& cfg, std::size_t n_pins) {
  if (cfg.pin_source == PinSource::fixed_list) {
    if (n_pins != 0 && n_pins != cfg.pins.size()) {
      throw InvalidInput("fixed_list holds " + std::to_string(cfg.pins.size()) + " PINs but " +
                         std::to_string(n_pins) + " were requested");
    }
    return cfg.pins;
  }
  if (n_pins == 0 || n_pins > static_cast<std::size_t>(kPinSpace)) {
    throw InvalidInput("n_pins must lie in 1..10000");
  }
  std::vector<int> pool(kPinSpace);
  std::iota(pool.begin(), pool.end(), 0);
  Rng rng = trace_rng(cfg.seed, "pin-selection");
  std::vector<Pin> out;
  for (std::size_t i = 0; i < n_pins; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
    out.push_back(Pin::from_number(pool[i]));
  }
  return out;
}

std::string trace_id_for(std::size_t index) {
  std::string digits = std::to_string(index);
  return "t" + std::string(digits.size() < 6 ? 6 - digits.size() : 0, '0') + digits;
}

GeneratedEntry generate_entry(const GeneratorConfig& cfg, const Pin& pin, std::size_t index) {
  const std::string id = trace_id_for(index);
  Rng rng = trace_rng(cfg.seed, id);
  GeneratedEntry e;
  e.trace = sample_trace(pin, cfg, rng, id);
  RenderedClip r = render_audio(e.trace, cfg, rng);
  std::copy(r.onsets_ms.begin(), r.onsets_ms.end(), e.trace.timestamps_ms.begin());
  e.clip = std::move(r.clip);
  return e;
}

DatasetManifest generate_dataset(const GeneratorConfig& cfg, std::size_t n_pins, std::size_t entries_per_pin,
                                 const std::filesystem::path& out_dir) {
  cfg.validate();
  if (entries_per_pin == 0) throw InvalidInput("entries_per_pin must be >= 1");
  DatasetManifest m;
  m.config = cfg;
  m.pins = choose_pins(cfg, n_pins);
  m.n_pins = m.pins.size();
  m.entries_per_pin = entries_per_pin;

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "clips", ec);
  if (ec) throw DataError("cannot create directory " + (out_dir / "clips").string() + ": " + ec.message());

  const std::size_t total = m.n_pins * entries_per_pin;
  std::vector<Json> truth(total);
  m.clips.resize(total);
  for_each_index(total, Execution::parallel, [&](std::size_t i) {
    const Pin& pin = m.pins[i / entries_per_pin];
    const GeneratedEntry e = generate_entry(cfg, pin, i);
    const std::string file = "clips/" + e.trace.trace_id + ".wav";
    write_wav((out_dir / file).string(), e.clip);
    truth[i] = truth_record(e.trace, file);
    m.clips[i] = ClipEntry{e.trace.trace_id, file, pin};
  });
  write_jsonl(out_dir / m.truth_file, truth);
  write_json_file(out_dir / "manifest.json", to_json(m));
  return m;
}

}  // namespace pinaudio
