#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "pinaudio/attack.hpp"
#include "pinaudio/batch.hpp"
#include "pinaudio/error.hpp"
#include "pinaudio/eval.hpp"
#include "pinaudio/records.hpp"
#include "pinaudio/synth.hpp"
#include "pinaudio/timing.hpp"
#include "pinaudio/util.hpp"
#include "pinaudio/wav.hpp"

namespace pinaudio::cli {
namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Shared helpers

Json read_config(const std::string& path) {
  Json j = read_json_file(path);
  if (!j.is_object()) throw InvalidInput("config file " + path + " must hold a JSON object");
  return j;
}

/// Removes and returns `key` from a config object.
std::optional<Json> take(Json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  Json v = j.at(key);
  j.erase(key);
  return v;
}

template <class T>
T as(const Json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("bad value for config key '") + key + "': " + e.what());
  }
}

void reject_leftovers(const Json& j, const std::string& what) {
  if (!j.empty()) throw InvalidInput("unknown " + what + " config key: '" + j.begin().key() + "'");
}

std::string file_hash(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return hex64(fnv1a64(ss.str()));
}

std::string meta_path(const std::string& out) { return out + ".meta.json"; }

Vpk parse_vpk(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw InvalidInput("--vpk expects POS:DIGIT with POS in 0..3, got '" + text + "'");
  }
  auto to_int = [&](const std::string& s) {
    if (s.size() != 1 || !std::isdigit(static_cast<unsigned char>(s[0]))) {
      throw InvalidInput("--vpk expects POS:DIGIT with POS in 0..3, got '" + text + "'");
    }
    return s[0] - '0';
  };
  return Vpk{to_int(text.substr(0, colon)), to_int(text.substr(colon + 1))};
}

std::map<std::string, KeystrokeTrace> index_truth(const std::vector<KeystrokeTrace>& truth) {
  std::map<std::string, KeystrokeTrace> m;
  for (const auto& t : truth) {
    if (!m.emplace(t.trace_id, t).second) throw DataError("duplicate trace_id in truth: " + t.trace_id);
  }
  return m;
}

std::vector<KeystrokeTrace> load_truth_file(const std::string& path) {
  std::vector<KeystrokeTrace> out;
  for (const auto& j : read_jsonl(path)) out.push_back(trace_from_truth_record(j));
  return out;
}

std::string list_ids(const std::vector<std::string>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size() && i < 10; ++i) s += (i ? ", " : "") + ids[i];
  if (ids.size() > 10) s += ", ... (" + std::to_string(ids.size()) + " total)";
  return s;
}

/// trace_id -> detected timestamps, for records without an error field.
std::map<std::string, std::vector<double>> load_detections(const std::string& path) {
  std::map<std::string, std::vector<double>> m;
  for (const auto& j : read_jsonl(path)) {
    try {
      if (j.contains("error")) continue;
      m[j.at("trace_id").get<std::string>()] = j.at("timestamps_ms").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed detection record in " + path + ": " + e.what());
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  std::string out;
  std::size_t pins = 10;
  std::size_t entries = 1;
  std::uint64_t seed = 1;
  std::string mode;
  double snr_db = 0.0;
  bool no_noise = false;
  std::string pin_list;
  std::string config;
  int jobs = 0;
};

int cmd_synth(const SynthOptions& o, const CLI::App& app, std::ostream& out) {
  GeneratorConfig cfg;
  std::size_t n_pins = 10, entries = 1;
  if (!o.config.empty()) {
    Json j = read_config(o.config);
    if (auto v = take(j, "n_pins")) n_pins = as<std::size_t>(*v, "n_pins");
    if (auto v = take(j, "entries_per_pin")) entries = as<std::size_t>(*v, "entries_per_pin");
    cfg = generator_config_from_json(j, cfg);
  }
  if (app.count("--pins")) n_pins = o.pins;
  if (app.count("--entries")) entries = o.entries;
  if (app.count("--seed")) cfg.seed = o.seed;
  if (app.count("--mode")) cfg.typist_mode = parse_typist_mode(o.mode);
  if (app.count("--snr")) cfg.noise_snr_db = o.snr_db;
  if (o.no_noise) cfg.noise = false;
  if (app.count("--pin-list")) {
    cfg.pin_source = PinSource::fixed_list;
    cfg.pins.clear();
    std::stringstream ss(o.pin_list);
    for (std::string tok; std::getline(ss, tok, ',');) cfg.pins.push_back(Pin::parse(tok));
    if (!app.count("--pins")) n_pins = 0;
  }
  cfg.validate();
  if (cfg.pin_source == PinSource::fixed_list && n_pins != 0 && n_pins != cfg.pins.size()) {
    throw InvalidInput("--pins " + std::to_string(n_pins) + " disagrees with a fixed list of " +
                       std::to_string(cfg.pins.size()) + " PINs");
  }
  if (cfg.pin_source == PinSource::uniform_random && (n_pins == 0 || n_pins > kPinSpace)) {
    throw InvalidInput("--pins must lie in 1..10000");
  }
  if (entries == 0) throw InvalidInput("--entries must be >= 1");

  set_worker_threads(o.jobs);
  const auto m = generate_dataset(cfg, n_pins, entries, o.out);
  out << "clips " << m.clips.size() << "\n";
  out << "manifest " << (fs::path(o.out) / "manifest.json").string() << "\n";
  out << "manifest_hash " << file_hash(fs::path(o.out) / "manifest.json") << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// extract

struct ExtractOptions {
  std::string data;
  std::string out;
  std::string truth;
  std::string config;
  int order = 16;
  double center = 0, bandwidth = 0, gate = 0, tolerance = 0, entry_gap = 0, min_separation = 0;
  std::size_t window = 0;
  int jobs = 0;
};

PipelineConfig pipeline_from(const ExtractOptions& o, const CLI::App& app, double dataset_rate) {
  PipelineConfig cfg = PipelineConfig::for_rate(dataset_rate);
  if (!o.config.empty()) cfg = pipeline_config_from_json(read_config(o.config), cfg);
  if (app.count("--order")) cfg.filter_order = o.order;
  if (app.count("--center")) cfg.center_freq_hz = o.center;
  if (app.count("--bandwidth")) cfg.bandwidth_hz = o.bandwidth;
  if (app.count("--gate")) cfg.gate_threshold = o.gate;
  if (app.count("--window")) cfg.window_samples = o.window;
  if (app.count("--tolerance")) cfg.match_tolerance_ms = o.tolerance;
  if (app.count("--entry-gap")) cfg.entry_gap_ms = o.entry_gap;
  if (app.count("--min-separation")) cfg.min_separation_ms = o.min_separation;
  cfg.validate();
  return cfg;
}

int cmd_extract(const ExtractOptions& o, const CLI::App& app, std::ostream& out) {
  const fs::path dir(o.data);
  const DatasetManifest manifest = manifest_from_json(read_json_file(dir / "manifest.json"));
  const PipelineConfig cfg = pipeline_from(o, app, manifest.config.sample_rate);

  std::map<std::string, KeystrokeTrace> truth;
  if (!o.truth.empty()) {
    truth = index_truth(load_truth_file(o.truth));
    std::vector<std::string> missing;
    for (const auto& c : manifest.clips)
      if (!truth.count(c.trace_id)) missing.push_back(c.trace_id);
    if (!missing.empty()) throw DataError("truth file " + o.truth + " lacks trace_ids: " + list_ids(missing));
  }

  set_worker_threads(o.jobs);
  const std::size_t n = manifest.clips.size();
  std::vector<Json> records(n);
  std::vector<std::optional<MatchReport>> matches(n);
  for_each_index(n, Execution::parallel, [&](std::size_t i) {
    const ClipEntry& c = manifest.clips[i];
    try {
      const AudioClip clip = read_wav((dir / c.file).string());
      const DetectionResult d = detect_keystrokes(clip, cfg);
      if (!truth.empty()) {
        const auto& ts = truth.at(c.trace_id).timestamps_ms;
        matches[i] = match_ground_truth(d, ts, cfg.match_tolerance_ms);
      }
      records[i] = detection_record(c.trace_id, d, matches[i]);
    } catch (const std::exception& e) {
      records[i] = Json{{"format_version", kRecordFormatVersion},
                        {"trace_id", c.trace_id},
                        {"file", c.file},
                        {"error", e.what()}};
    }
  });
  write_jsonl(o.out, records);

  std::vector<std::string> failed;
  std::vector<MatchReport> reports;
  for (std::size_t i = 0; i < n; ++i) {
    if (records[i].contains("error")) failed.push_back(manifest.clips[i].trace_id);
    if (matches[i]) reports.push_back(*matches[i]);
  }
  Json meta{{"format_version", kRecordFormatVersion},
            {"command", "extract"},
            {"dataset", o.data},
            {"pipeline", to_json(cfg)},
            {"clips", n},
            {"processed", n - failed.size()},
            {"failed", failed}};
  if (!reports.empty()) {
    const auto s = extraction_error_report(reports);
    Json summary{{"truth_events", s.truth_events},
                 {"matched", s.matched},
                 {"misses", s.misses},
                 {"false_positives", s.false_positives},
                 {"detection_rate", round_sig4(s.detection_rate)},
                 {"mean_error_ms", round_sig4(s.mean_error_ms)},
                 {"std_error_ms", round_sig4(s.std_error_ms)},
                 {"gap_count", s.gap_count},
                 {"mean_abs_gap_error_ms", round_sig4(s.mean_abs_gap_error_ms)},
                 {"p75_abs_gap_error_ms", round_sig4(s.p75_abs_gap_error_ms)},
                 {"p97_abs_gap_error_ms", round_sig4(s.p97_abs_gap_error_ms)}};
    if (s.residual_normality) {
      summary["anderson_darling_a2_star"] = round_sig4(s.residual_normality->a2_star);
      summary["anderson_darling_reject_1pct"] = s.residual_normality->reject_1pct;
    }
    meta["summary"] = summary;
    out << "detection_rate " << round_sig4(s.detection_rate) << "\n";
    out << "mean_abs_gap_error_ms " << round_sig4(s.mean_abs_gap_error_ms) << "\n";
  }
  write_json_file(meta_path(o.out), meta);
  out << "processed " << n - failed.size() << "/" << n << "\n";
  if (!failed.empty()) out << "failed " << list_ids(failed) << "\n";
  return n > 0 && failed.size() == n ? kDataError : kOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string truth;
  std::string detections;
  std::string out;
  std::string mode;
  std::size_t min_samples = 10;
  std::string config;
};

int cmd_train(const TrainOptions& o, const CLI::App& app, std::ostream& out) {
  FitOptions fit;
  if (!o.config.empty()) {
    Json j = read_config(o.config);
    if (auto v = take(j, "min_samples")) fit.min_samples = as<std::size_t>(*v, "min_samples");
    if (auto v = take(j, "typist_mode")) fit.mode_filter = parse_typist_mode(as<std::string>(*v, "typist_mode"));
    reject_leftovers(j, "train");
  }
  if (app.count("--min-samples")) fit.min_samples = o.min_samples;
  if (app.count("--mode")) fit.mode_filter = parse_typist_mode(o.mode);
  if (fit.min_samples < 2) throw InvalidInput("--min-samples must be >= 2");
  if (fit.mode_filter == TypistMode::mixed) fit.mode_filter.reset();

  std::vector<KeystrokeTrace> traces = load_truth_file(o.truth);
  std::vector<std::string> skipped;
  if (!o.detections.empty()) {
    const auto det = load_detections(o.detections);
    std::vector<KeystrokeTrace> kept;
    for (auto t : traces) {
      auto it = det.find(t.trace_id);
      if (it == det.end() || it->second.size() != kPinLength) {
        skipped.push_back(t.trace_id);
        continue;
      }
      std::copy(it->second.begin(), it->second.end(), t.timestamps_ms.begin());
      kept.push_back(std::move(t));
    }
    traces = std::move(kept);
  }
  if (traces.empty()) throw DataError("no training traces in " + o.truth);

  const FitReport r = fit_model(traces, KeypadLayout::standard(), fit);
  save_model(o.out, r.model);

  Json rejected = Json::array();
  for (const auto& d : r.rejected) rejected.push_back(Json{{"trace_id", d.trace_id}, {"message", d.message}});
  Json meta{{"format_version", kRecordFormatVersion},
            {"command", "train"},
            {"truth", o.truth},
            {"detections", o.detections.empty() ? Json(nullptr) : Json(o.detections)},
            {"min_samples", fit.min_samples},
            {"mode_filter", fit.mode_filter ? Json(to_string(*fit.mode_filter)) : Json(nullptr)},
            {"model_id", r.model.model_id},
            {"traces_used", r.traces_used},
            {"skipped_detections", skipped},
            {"rejected", rejected},
            {"distance_correlation", round_sig4(r.model.distance_correlation)},
            {"distance_flat", r.model.distance_flat()}};
  write_json_file(meta_path(o.out), meta);

  out << "model_id " << r.model.model_id << "\n";
  out << "traces_used " << r.traces_used << "\n";
  out << "distance_correlation " << round_sig4(r.model.distance_correlation) << "\n";
  out << "distance_flat " << (r.model.distance_flat() ? "true" : "false") << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// attack

struct AttackOptions {
  std::vector<std::string> models;
  std::string truth;
  std::string detections;
  std::string out;
  std::string vpk;
  std::string thermal;
  std::string mode;
  int vpk_from_truth = -1;
  bool thermal_from_truth = false;
  bool mode_from_truth = false;
  std::size_t top = 100;
  std::string config;
  int jobs = 0;
};

int cmd_attack(AttackOptions o, const CLI::App& app, std::ostream& out) {
  if (!o.config.empty()) {
    Json j = read_config(o.config);
    if (auto v = take(j, "vpk"); v && !app.count("--vpk")) o.vpk = as<std::string>(*v, "vpk");
    if (auto v = take(j, "thermal"); v && !app.count("--thermal")) o.thermal = as<std::string>(*v, "thermal");
    if (auto v = take(j, "mode"); v && !app.count("--mode")) o.mode = as<std::string>(*v, "mode");
    if (auto v = take(j, "top"); v && !app.count("--top")) o.top = as<std::size_t>(*v, "top");
    if (auto v = take(j, "vpk_from_truth"); v && !app.count("--vpk-from-truth")) {
      o.vpk_from_truth = as<int>(*v, "vpk_from_truth");
    }
    if (auto v = take(j, "thermal_from_truth"); v && !app.count("--thermal-from-truth")) {
      o.thermal_from_truth = as<bool>(*v, "thermal_from_truth");
    }
    if (auto v = take(j, "mode_from_truth"); v && !app.count("--mode-from-truth")) {
      o.mode_from_truth = as<bool>(*v, "mode_from_truth");
    }
    reject_leftovers(j, "attack");
  }

  // Fixed knowledge is validated before any file is read.
  KnowledgeSpec fixed;
  if (!o.vpk.empty()) fixed.vpk = parse_vpk(o.vpk);
  if (!o.thermal.empty()) fixed.thermal_keys = KeySet::parse(o.thermal);
  if (!o.mode.empty()) fixed.typist_mode = parse_typist_mode(o.mode);
  fixed.validate();
  if (o.vpk_from_truth >= kPinLength) throw InvalidInput("--vpk-from-truth position must be 0..3");
  if (o.vpk_from_truth >= 0 && fixed.vpk) throw InvalidInput("--vpk and --vpk-from-truth are exclusive");
  if (o.thermal_from_truth && fixed.thermal_keys) {
    throw InvalidInput("--thermal and --thermal-from-truth are exclusive");
  }
  if (o.mode_from_truth && fixed.typist_mode) throw InvalidInput("--mode and --mode-from-truth are exclusive");
  const bool needs_truth = o.vpk_from_truth >= 0 || o.thermal_from_truth || o.mode_from_truth;
  if (o.truth.empty() && o.detections.empty()) throw InvalidInput("attack needs --truth or --detections");
  if (needs_truth && o.truth.empty()) throw InvalidInput("truth-derived knowledge needs --truth");

  ModelBank bank;
  std::vector<std::string> model_ids;
  for (const auto& path : o.models) {
    TimingModel m = load_model(path);
    model_ids.push_back(m.model_id);
    const TypistMode key = m.typist_mode;
    if (!bank.emplace(key, std::move(m)).second) {
      throw InvalidInput("two models given for typist mode '" + std::string(to_string(key)) + "'");
    }
  }

  // Each job is one trace: gaps from detections when given, else from truth.
  struct Item {
    std::string trace_id;
    std::optional<Pin> truth;
  };
  std::vector<Item> items;
  std::vector<AttackJob> jobs;
  std::vector<std::string> skipped;

  auto knowledge_for = [&](const KeystrokeTrace* t) {
    KnowledgeSpec k = fixed;
    if (t) {
      if (o.vpk_from_truth >= 0) {
        k.vpk = Vpk{o.vpk_from_truth, t->pin.digit(static_cast<std::size_t>(o.vpk_from_truth))};
      }
      if (o.thermal_from_truth) k.thermal_keys = KeySet::of_pin(t->pin);
      if (o.mode_from_truth) k.typist_mode = t->mode;
    }
    k.validate();
    return k;
  };

  if (!o.detections.empty()) {
    std::map<std::string, KeystrokeTrace> truth;
    if (!o.truth.empty()) truth = index_truth(load_truth_file(o.truth));
    for (const auto& [id, ts] : load_detections(o.detections)) {
      const KeystrokeTrace* t = nullptr;
      if (!truth.empty()) {
        auto it = truth.find(id);
        if (it == truth.end()) throw DataError("truth file lacks trace_id " + id);
        t = &it->second;
      }
      if (ts.size() != kPinLength) {
        skipped.push_back(id);
        continue;
      }
      try {
        jobs.push_back({GapSequence::from_timestamps(ts), knowledge_for(t), t ? std::optional<Pin>(t->pin) : std::nullopt});
      } catch (const InvalidInput&) {
        skipped.push_back(id);
        continue;
      }
      items.push_back({id, jobs.back().truth});
    }
  } else {
    for (const auto& t : load_truth_file(o.truth)) {
      jobs.push_back({t.gaps(), knowledge_for(&t), t.pin});
      items.push_back({t.trace_id, t.pin});
    }
  }
  if (jobs.empty()) throw DataError("no traces to attack");
  for (const auto& j : jobs) select_model(bank, j.knowledge.typist_mode);  // fail before the batch

  set_worker_threads(o.jobs);
  const auto outcomes = attack_batch(bank, jobs, Execution::parallel);
  std::vector<Json> records;
  records.reserve(outcomes.size());
  std::size_t found = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    records.push_back(ranking_record(items[i].trace_id, outcomes[i].ranking, o.top, items[i].truth, outcomes[i].rank));
    if (outcomes[i].rank) ++found;
  }
  write_jsonl(o.out, records);

  Json meta{{"format_version", kRecordFormatVersion},
            {"command", "attack"},
            {"models", model_ids},
            {"truth", o.truth.empty() ? Json(nullptr) : Json(o.truth)},
            {"detections", o.detections.empty() ? Json(nullptr) : Json(o.detections)},
            {"knowledge", to_json(fixed)},
            {"vpk_from_truth", o.vpk_from_truth >= 0 ? Json(o.vpk_from_truth) : Json(nullptr)},
            {"thermal_from_truth", o.thermal_from_truth},
            {"mode_from_truth", o.mode_from_truth},
            {"top", o.top},
            {"traces", records.size()},
            {"skipped", skipped}};
  write_json_file(meta_path(o.out), meta);
  out << "traces " << records.size() << "\n";
  if (!o.truth.empty()) out << "true_pin_in_candidates " << found << "/" << records.size() << "\n";
  if (!skipped.empty()) out << "skipped " << list_ids(skipped) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::vector<std::string> rankings;
  std::vector<std::string> labels;
  std::string out_dir;
  std::size_t k_max = 100;
  std::vector<std::string> baselines;
  int vpk_position = 0;
  bool p50 = false;
  std::size_t p50_top = 5;
  std::size_t compare_k = 5;
  std::string config;
};

struct Condition {
  std::string label;
  std::vector<Rank> ranks;
  std::vector<Pin> pins;
};

Condition load_condition(const std::string& path) {
  Condition c;
  for (const auto& j : read_jsonl(path)) {
    try {
      if (c.label.empty()) c.label = j.at("knowledge").at("label").get<std::string>();
      if (j.at("true_pin").is_null()) throw DataError("ranking record without true_pin in " + path);
      c.pins.push_back(Pin::parse(j.at("true_pin").get<std::string>()));
      const auto& r = j.at("true_rank");
      c.ranks.push_back(r.is_null() ? Rank{} : Rank{r.get<std::size_t>()});
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed ranking record in " + path + ": " + e.what());
    } catch (const InvalidInput& e) {
      throw DataError("malformed ranking record in " + path + ": " + e.what());
    }
  }
  if (c.ranks.empty()) throw DataError("no ranking records in " + path);
  return c;
}

int cmd_eval(EvalOptions o, const CLI::App& app, std::ostream& out) {
  if (!o.config.empty()) {
    Json j = read_config(o.config);
    if (auto v = take(j, "k_max"); v && !app.count("--k-max")) o.k_max = as<std::size_t>(*v, "k_max");
    if (auto v = take(j, "baselines"); v && !app.count("--baseline")) {
      o.baselines = as<std::vector<std::string>>(*v, "baselines");
    }
    if (auto v = take(j, "vpk_position"); v && !app.count("--vpk-position")) {
      o.vpk_position = as<int>(*v, "vpk_position");
    }
    if (auto v = take(j, "p50"); v && !app.count("--p50")) o.p50 = as<bool>(*v, "p50");
    if (auto v = take(j, "p50_top"); v && !app.count("--p50-top")) o.p50_top = as<std::size_t>(*v, "p50_top");
    if (auto v = take(j, "compare_k"); v && !app.count("--compare-k")) o.compare_k = as<std::size_t>(*v, "compare_k");
    reject_leftovers(j, "eval");
  }
  if (o.k_max == 0) throw InvalidInput("--k-max must be >= 1");
  if (o.compare_k == 0 || o.compare_k > o.k_max) throw InvalidInput("--compare-k must lie in 1..k-max");
  if (!o.labels.empty() && o.labels.size() != o.rankings.size()) {
    throw InvalidInput("--label must be given once per --rankings file");
  }
  std::vector<BaselineKind> kinds;
  for (const auto& b : o.baselines) kinds.push_back(parse_baseline(b));
  if (o.vpk_position < 0 || o.vpk_position >= kPinLength) throw InvalidInput("--vpk-position must be 0..3");

  std::vector<Condition> conds;
  for (std::size_t i = 0; i < o.rankings.size(); ++i) {
    conds.push_back(load_condition(o.rankings[i]));
    if (!o.labels.empty()) conds.back().label = o.labels[i];
  }

  std::error_code ec;
  fs::create_directories(o.out_dir, ec);
  if (ec) throw DataError("cannot create directory " + o.out_dir + ": " + ec.message());

  std::vector<GuessingCdf> curves;
  for (const auto& c : conds) curves.push_back(guessing_cdf(c.ranks, o.k_max, c.label));
  {
    std::ofstream csv(fs::path(o.out_dir) / "cdf.csv", std::ios::binary);
    if (!csv) throw DataError("cannot write " + (fs::path(o.out_dir) / "cdf.csv").string());
    write_cdf_csv(csv, curves);
  }

  const std::size_t report_ks[] = {1, 3, 5, 10, 20, 50, 100};
  Json conditions = Json::array();
  for (std::size_t i = 0; i < conds.size(); ++i) {
    const auto& g = curves[i];
    Json cdf_at = Json::object(), hits_at = Json::object();
    for (std::size_t k : report_ks) {
      if (k > o.k_max) continue;
      cdf_at[std::to_string(k)] = round_sig4(g.at(k));
      hits_at[std::to_string(k)] = g.hits_at(k);
    }
    Json improvements = Json::object();
    for (auto kind : kinds) {
      const Baseline base = Baseline::make(kind, conds[i].pins, o.vpk_position);
      Json per_k = Json::object();
      for (std::size_t k : {1u, 3u, 5u, 10u}) {
        if (k <= o.k_max) per_k[std::to_string(k)] = round_sig4(improvement_factor(g, base, k));
      }
      improvements[to_string(kind)] = per_k;
    }
    conditions.push_back(Json{{"label", g.label},
                              {"source", o.rankings[i]},
                              {"n_trials", g.n_trials},
                              {"cdf_at", cdf_at},
                              {"hits_at", hits_at},
                              {"improvement", improvements}});
  }

  Json comparisons = Json::array();
  for (std::size_t i = 0; i + 1 < curves.size(); ++i) {
    for (std::size_t j = i + 1; j < curves.size(); ++j) {
      const auto r = chi_square_guess_freq(curves[i], curves[j], o.compare_k);
      comparisons.push_back(Json{{"a", curves[i].label},
                                 {"b", curves[j].label},
                                 {"k", o.compare_k},
                                 {"yates", true},
                                 {"statistic", round_sig4(r.statistic)},
                                 {"p_value", round_sig4(r.p_value)},
                                 {"low_expected", r.low_expected}});
    }
  }

  Json report{{"format_version", kRecordFormatVersion},
              {"command", "eval"},
              {"k_max", o.k_max},
              {"baselines", o.baselines},
              {"vpk_position", o.vpk_position},
              {"conditions", conditions},
              {"chi_square", comparisons}};

  if (o.p50) {
    std::vector<std::string> labels;
    std::vector<std::vector<P50Record>> columns;
    Json p50_json = Json::object();
    for (const auto& c : conds) {
      std::map<Pin, std::vector<Rank>> per_pin;
      for (std::size_t t = 0; t < c.pins.size(); ++t) per_pin[c.pins[t]].push_back(c.ranks[t]);
      std::erase_if(per_pin, [](const auto& kv) { return kv.second.size() < 2; });
      if (per_pin.empty()) throw DataError("P50 needs PINs with at least two trials in condition " + c.label);
      auto col = p50(per_pin);
      Json rows = Json::array();
      for (std::size_t r = 0; r < col.size() && r < o.p50_top; ++r) {
        rows.push_back(Json{{"pin", col[r].pin.str()},
                            {"trials", col[r].trials},
                            {"attempts", col[r].attempts ? Json(*col[r].attempts) : Json(nullptr)}});
      }
      p50_json[c.label] = rows;
      labels.push_back(c.label);
      columns.push_back(std::move(col));
    }
    report["p50"] = p50_json;
    std::ofstream table(fs::path(o.out_dir) / "p50.txt", std::ios::binary);
    if (!table) throw DataError("cannot write " + (fs::path(o.out_dir) / "p50.txt").string());
    write_p50_table(table, labels, columns, o.p50_top);
  }
  write_json_file(fs::path(o.out_dir) / "report.json", report);

  for (const auto& g : curves) {
    out << g.label << " n=" << g.n_trials;
    for (std::size_t k : {1u, 5u, 10u})
      if (k <= o.k_max) out << " cdf@" << k << "=" << round_sig4(g.at(k));
    out << "\n";
  }
  out << "report " << (fs::path(o.out_dir) / "report.json").string() << "\n";
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Acoustic PIN-pad timing toolkit: synthesize, extract, train, attack, evaluate."};
  app.name(args.empty() ? "pinaudio" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);
  int jobs_flag = 0;
  app.add_option("--jobs,-j", jobs_flag, "Worker threads (default: all cores)")->check(CLI::NonNegativeNumber);

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Generate a labelled synthetic dataset");
  synth->add_option("--out,-o", so.out, "Output directory")->required();
  synth->add_option("--pins", so.pins, "Number of distinct PINs");
  synth->add_option("--entries", so.entries, "Entries (clips) per PIN");
  synth->add_option("--seed", so.seed, "Dataset seed");
  synth->add_option("--mode", so.mode, "Typist mode: single_finger | other");
  synth->add_option("--snr", so.snr_db, "Noise SNR in dB (beep power / noise power)");
  synth->add_flag("--no-noise", so.no_noise, "Render clean clips");
  synth->add_option("--pin-list", so.pin_list, "Comma-separated PINs instead of random selection");
  synth->add_option("--config", so.config, "Generator config JSON");

  ExtractOptions eo;
  auto* extract = app.add_subcommand("extract", "Detect keystroke onsets in a dataset's clips");
  extract->add_option("--data,-d", eo.data, "Dataset directory (with manifest.json)")->required();
  extract->add_option("--out,-o", eo.out, "Detections JSON-lines output")->required();
  extract->add_option("--truth", eo.truth, "Truth JSON-lines; adds match fields to each record");
  extract->add_option("--config", eo.config, "Pipeline config JSON");
  extract->add_option("--order", eo.order, "Band-pass filter order");
  extract->add_option("--center", eo.center, "Band-pass centre frequency (Hz)");
  extract->add_option("--bandwidth", eo.bandwidth, "Band-pass bandwidth (Hz)");
  extract->add_option("--gate", eo.gate, "Amplitude gate threshold");
  extract->add_option("--window", eo.window, "Sliding-max window (samples)");
  extract->add_option("--tolerance", eo.tolerance, "Match tolerance (ms)");
  extract->add_option("--entry-gap", eo.entry_gap, "Silence separating PIN entries (ms)");
  extract->add_option("--min-separation", eo.min_separation, "Minimum spacing of detected onsets (ms)");

  TrainOptions to;
  auto* train = app.add_subcommand("train", "Fit a per-class gamma timing model");
  train->add_option("--truth", to.truth, "Truth JSON-lines (PINs, timestamps, modes)")->required();
  train->add_option("--detections", to.detections, "Use detected timestamps instead of true ones");
  train->add_option("--out,-o", to.out, "Model file")->required();
  train->add_option("--mode", to.mode, "Train only on traces of this typist mode");
  train->add_option("--min-samples", to.min_samples, "Samples needed before a class gets its own fit");
  train->add_option("--config", to.config, "Train config JSON");

  AttackOptions ao;
  auto* attack = app.add_subcommand("attack", "Rank candidate PINs for each trace");
  attack->add_option("--model,-m", ao.models, "Timing model file (repeatable, one per typist mode)")->required();
  attack->add_option("--truth", ao.truth, "Truth JSON-lines (gap source unless --detections; gives true ranks)");
  attack->add_option("--detections", ao.detections, "Detections JSON-lines (gap source)");
  attack->add_option("--out,-o", ao.out, "Rankings JSON-lines output")->required();
  attack->add_option("--vpk", ao.vpk, "Known digit as POS:DIGIT, POS in 0..3");
  attack->add_option("--thermal", ao.thermal, "Thermal key set, e.g. 0,2");
  attack->add_option("--mode", ao.mode, "Assumed typist mode (selects the model)");
  attack->add_option("--vpk-from-truth", ao.vpk_from_truth, "Reveal the true digit at this position per trace");
  attack->add_flag("--thermal-from-truth", ao.thermal_from_truth, "Reveal each trace's true key set");
  attack->add_flag("--mode-from-truth", ao.mode_from_truth, "Use each trace's true typist mode");
  attack->add_option("--top", ao.top, "Candidates stored per record (0 = all)");
  attack->add_option("--config", ao.config, "Attack config JSON");

  EvalOptions vo;
  auto* eval = app.add_subcommand("eval", "Guessing curves, baselines, chi-square and P50 reports");
  eval->add_option("--rankings,-r", vo.rankings, "Rankings JSON-lines (repeatable, one per condition)")->required();
  eval->add_option("--label", vo.labels, "Condition label per rankings file");
  eval->add_option("--out-dir,-o", vo.out_dir, "Report directory")->required();
  eval->add_option("--k-max", vo.k_max, "Largest attempt count on the curve");
  eval->add_option("--baseline", vo.baselines, "rg | rgvpk | rgt | rgtvpk (repeatable)");
  eval->add_option("--vpk-position", vo.vpk_position, "Known-digit position for the rgtvpk baseline");
  eval->add_flag("--p50", vo.p50, "Write the per-PIN P50 table");
  eval->add_option("--p50-top", vo.p50_top, "Rows in the P50 table");
  eval->add_option("--compare-k", vo.compare_k, "k for pairwise chi-square comparisons");
  eval->add_option("--config", vo.config, "Eval config JSON");

  for (auto* sub : {synth, extract, attack}) {
    sub->add_option("--jobs,-j", jobs_flag, "Worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return kUsageError;
  }
  so.jobs = eo.jobs = ao.jobs = jobs_flag;

  try {
    if (synth->parsed()) return cmd_synth(so, *synth, out);
    if (extract->parsed()) return cmd_extract(eo, *extract, out);
    if (train->parsed()) return cmd_train(to, *train, out);
    if (attack->parsed()) return cmd_attack(ao, *attack, out);
    if (eval->parsed()) return cmd_eval(vo, *eval, out);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kUsageError;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace pinaudio::cli
