#include "pinaudio/records.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "pinaudio/error.hpp"

namespace pinaudio {
namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& what) {
  if (!j.is_object()) throw InvalidInput(what + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw InvalidInput("unknown " + what + " key: '" + it.key() + "'");
  }
}

template <class T>
void read_field(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("bad value for '") + key + "': " + e.what());
  }
}

Json gamma_json(const GammaParams& g) { return Json{{"shape", g.shape}, {"scale", g.scale}}; }

GammaParams gamma_from_json(const Json& j) {
  check_keys(j, {"shape", "scale", "mean"}, "gamma");
  GammaParams g{};
  read_field(j, "shape", g.shape);
  if (j.contains("mean") && !j.contains("scale")) {
    g.scale = j.at("mean").get<double>() / g.shape;
  } else {
    read_field(j, "scale", g.scale);
  }
  return g;
}

std::string_view pin_source_name(PinSource s) { return s == PinSource::fixed_list ? "fixed_list" : "uniform_random"; }

}  // namespace

Json to_json(const GeneratorConfig& cfg) {
  Json sf = Json::object();
  for (std::size_t i = 0; i < kNumClasses; ++i) sf[std::string(tag(kAllClasses[i]))] = gamma_json(cfg.single_finger_gaps[i]);
  Json pins = Json::array();
  for (const auto& p : cfg.pins) pins.push_back(p.str());
  return Json{{"format_version", GeneratorConfig::kFormatVersion},
              {"seed", cfg.seed},
              {"pin_source", pin_source_name(cfg.pin_source)},
              {"pins", pins},
              {"typist_mode", to_string(cfg.typist_mode)},
              {"single_finger_gaps", sf},
              {"other_gaps", gamma_json(cfg.other_gaps)},
              {"beep",
               {{"frequency_hz", cfg.beep.frequency_hz},
                {"duration_ms", cfg.beep.duration_ms},
                {"amplitude", cfg.beep.amplitude},
                {"ramp_ms", cfg.beep.ramp_ms}}},
              {"noise", cfg.noise},
              {"noise_snr_db", cfg.noise_snr_db},
              {"sample_rate", cfg.sample_rate},
              {"inter_entry_gap_ms", cfg.inter_entry_gap_ms},
              {"pad_ms", cfg.pad_ms},
              {"min_gap_ms", cfg.min_gap_ms}};
}

GeneratorConfig generator_config_from_json(const Json& j, GeneratorConfig c) {
  check_keys(j,
             {"format_version", "seed", "pin_source", "pins", "typist_mode", "single_finger_gaps", "other_gaps",
              "beep", "noise", "noise_snr_db", "sample_rate", "inter_entry_gap_ms", "pad_ms", "min_gap_ms"},
             "generator config");
  read_field(j, "seed", c.seed);
  if (j.contains("pin_source")) {
    const auto s = j.at("pin_source").get<std::string>();
    if (s == "fixed_list") c.pin_source = PinSource::fixed_list;
    else if (s == "uniform_random") c.pin_source = PinSource::uniform_random;
    else throw InvalidInput("unknown pin_source: " + s);
  }
  if (j.contains("pins")) {
    c.pins.clear();
    for (const auto& p : j.at("pins")) c.pins.push_back(Pin::parse(p.get<std::string>()));
  }
  if (j.contains("typist_mode")) c.typist_mode = parse_typist_mode(j.at("typist_mode").get<std::string>());
  if (j.contains("single_finger_gaps")) {
    const auto& sf = j.at("single_finger_gaps");
    check_keys(sf, {"Z", "U1", "U2", "U3", "D1", "D2", "SD", "LD"}, "single_finger_gaps");
    for (auto it = sf.begin(); it != sf.end(); ++it) {
      c.single_finger_gaps[index_of(class_from_tag(it.key()))] = gamma_from_json(it.value());
    }
  }
  if (j.contains("other_gaps")) c.other_gaps = gamma_from_json(j.at("other_gaps"));
  if (j.contains("beep")) {
    const auto& b = j.at("beep");
    check_keys(b, {"frequency_hz", "duration_ms", "amplitude", "ramp_ms"}, "beep");
    read_field(b, "frequency_hz", c.beep.frequency_hz);
    read_field(b, "duration_ms", c.beep.duration_ms);
    read_field(b, "amplitude", c.beep.amplitude);
    read_field(b, "ramp_ms", c.beep.ramp_ms);
  }
  read_field(j, "noise", c.noise);
  read_field(j, "noise_snr_db", c.noise_snr_db);
  read_field(j, "sample_rate", c.sample_rate);
  read_field(j, "inter_entry_gap_ms", c.inter_entry_gap_ms);
  read_field(j, "pad_ms", c.pad_ms);
  read_field(j, "min_gap_ms", c.min_gap_ms);
  return c;
}

Json to_json(const PipelineConfig& c) {
  return Json{{"sample_rate", c.sample_rate},
              {"filter_order", c.filter_order},
              {"center_freq_hz", c.center_freq_hz},
              {"bandwidth_hz", c.bandwidth_hz},
              {"gate_threshold", c.gate_threshold},
              {"window_samples", c.window_samples},
              {"min_separation_ms", c.min_separation_ms},
              {"match_tolerance_ms", c.match_tolerance_ms},
              {"peak_fraction", c.peak_fraction},
              {"min_contrast", c.min_contrast},
              {"entry_gap_ms", c.entry_gap_ms}};
}

PipelineConfig pipeline_config_from_json(const Json& j, PipelineConfig c) {
  check_keys(j,
             {"sample_rate", "filter_order", "center_freq_hz", "bandwidth_hz", "gate_threshold", "window_samples",
              "min_separation_ms", "match_tolerance_ms", "peak_fraction", "min_contrast", "entry_gap_ms"},
             "pipeline config");
  read_field(j, "sample_rate", c.sample_rate);
  read_field(j, "filter_order", c.filter_order);
  read_field(j, "center_freq_hz", c.center_freq_hz);
  read_field(j, "bandwidth_hz", c.bandwidth_hz);
  read_field(j, "gate_threshold", c.gate_threshold);
  read_field(j, "window_samples", c.window_samples);
  read_field(j, "min_separation_ms", c.min_separation_ms);
  read_field(j, "match_tolerance_ms", c.match_tolerance_ms);
  read_field(j, "peak_fraction", c.peak_fraction);
  read_field(j, "min_contrast", c.min_contrast);
  read_field(j, "entry_gap_ms", c.entry_gap_ms);
  return c;
}

Json to_json(const KnowledgeSpec& k) {
  Json j = Json::object();
  j["label"] = k.label();
  j["vpk"] = k.vpk ? Json{{"position", k.vpk->position}, {"digit", k.vpk->digit}} : Json(nullptr);
  j["thermal_keys"] = k.thermal_keys ? Json(k.thermal_keys->digits()) : Json(nullptr);
  j["typist_mode"] = k.typist_mode ? Json(to_string(*k.typist_mode)) : Json(nullptr);
  return j;
}

Json truth_record(const KeystrokeTrace& t, const std::string& clip_file) {
  return Json{{"format_version", kRecordFormatVersion},
              {"trace_id", t.trace_id},
              {"pin", t.pin.str()},
              {"timestamps_ms", t.timestamps_ms},
              {"typist_mode", to_string(t.mode)},
              {"clip", clip_file}};
}

KeystrokeTrace trace_from_truth_record(const Json& j) {
  try {
    KeystrokeTrace t;
    t.trace_id = j.at("trace_id").get<std::string>();
    t.pin = Pin::parse(j.at("pin").get<std::string>());
    const auto ts = j.at("timestamps_ms").get<std::vector<double>>();
    if (ts.size() != kPinLength) throw DataError("truth record " + t.trace_id + " needs 4 timestamps");
    std::copy(ts.begin(), ts.end(), t.timestamps_ms.begin());
    t.mode = parse_typist_mode(j.at("typist_mode").get<std::string>());
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed truth record: ") + e.what());
  } catch (const InvalidInput& e) {
    throw DataError(std::string("malformed truth record: ") + e.what());
  }
}

Json to_json(const DatasetManifest& m) {
  Json pins = Json::array();
  for (const auto& p : m.pins) pins.push_back(p.str());
  Json clips = Json::array();
  for (const auto& c : m.clips) clips.push_back(Json{{"trace_id", c.trace_id}, {"file", c.file}, {"pin", c.pin.str()}});
  return Json{{"format_version", DatasetManifest::kFormatVersion},
              {"kind", "pinaudio-dataset"},
              {"seed", m.config.seed},
              {"generator", to_json(m.config)},
              {"n_pins", m.n_pins},
              {"entries_per_pin", m.entries_per_pin},
              {"pins", pins},
              {"truth_file", m.truth_file},
              {"clips", clips}};
}

DatasetManifest manifest_from_json(const Json& j) {
  try {
    if (j.at("format_version").get<int>() != DatasetManifest::kFormatVersion) {
      throw DataError("unsupported manifest format_version");
    }
    DatasetManifest m;
    m.config = generator_config_from_json(j.at("generator"));
    m.n_pins = j.at("n_pins").get<std::size_t>();
    m.entries_per_pin = j.at("entries_per_pin").get<std::size_t>();
    for (const auto& p : j.at("pins")) m.pins.push_back(Pin::parse(p.get<std::string>()));
    m.truth_file = j.at("truth_file").get<std::string>();
    for (const auto& c : j.at("clips")) {
      m.clips.push_back(ClipEntry{c.at("trace_id").get<std::string>(), c.at("file").get<std::string>(),
                                  Pin::parse(c.at("pin").get<std::string>())});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
}

Json to_json(const MatchReport& r) {
  Json errors = Json::array();
  for (const auto& m : r.matches) errors.push_back(m.error_ms);
  return Json{{"truth_count", r.truth_count},         {"detected_count", r.detected_count},
              {"matched", r.matches.size()},          {"misses", r.misses},
              {"false_positives", r.false_positives}, {"detection_rate", r.detection_rate},
              {"errors_ms", errors},                  {"mean_error_ms", r.mean_error_ms},
              {"std_error_ms", r.std_error_ms},       {"p75_abs_error_ms", r.p75_abs_error_ms},
              {"p97_abs_error_ms", r.p97_abs_error_ms}};
}

Json detection_record(const std::string& trace_id, const DetectionResult& d, const std::optional<MatchReport>& match) {
  Json j{{"format_version", kRecordFormatVersion},
         {"trace_id", trace_id},
         {"timestamps_ms", d.timestamps_ms},
         {"peak_levels", d.peak_levels},
         {"floor", d.floor},
         {"level", d.level}};
  if (match) j["match"] = to_json(*match);
  return j;
}

Json ranking_record(const std::string& trace_id, const PinRanking& r, std::size_t top_n,
                    const std::optional<Pin>& truth, const std::optional<std::size_t>& rank) {
  const std::size_t n = top_n == 0 ? r.candidates.size() : std::min(top_n, r.candidates.size());
  Json cands = Json::array();
  Json scores = Json::array();
  for (std::size_t i = 0; i < n; ++i) {
    cands.push_back(r.candidates[i].pin.str());
    scores.push_back(r.candidates[i].score);
  }
  Json j{{"format_version", kRecordFormatVersion},
         {"trace_id", trace_id},
         {"model_id", r.model_id},
         {"knowledge", to_json(r.knowledge)},
         {"candidate_count", r.candidates.size()},
         {"candidates", cands},
         {"scores", scores}};
  j["true_pin"] = truth ? Json(truth->str()) : Json(nullptr);
  j["true_rank"] = rank ? Json(*rank) : Json(nullptr);
  return j;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<Json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& r : records) out << r.dump() << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<KeystrokeTrace> read_truth(const std::filesystem::path& dataset_dir) {
  std::vector<KeystrokeTrace> out;
  for (const auto& j : read_jsonl(dataset_dir / "truth.jsonl")) out.push_back(trace_from_truth_record(j));
  return out;
}

}  // namespace pinaudio
