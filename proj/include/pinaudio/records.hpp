#pragma once

// JSON / JSON-lines schemas for configs, datasets, detections and rankings.
// Every top-level record carries a format_version field.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pinaudio/attack.hpp"
#include "pinaudio/audio.hpp"
#include "pinaudio/synth.hpp"

namespace pinaudio {

using Json = nlohmann::ordered_json;

inline constexpr int kRecordFormatVersion = 1;

Json to_json(const GeneratorConfig& cfg);
/// Keys absent from `j` keep the value in `base`. Throws InvalidInput on
/// unknown keys or bad values.
GeneratorConfig generator_config_from_json(const Json& j, GeneratorConfig base = {});

Json to_json(const PipelineConfig& cfg);
PipelineConfig pipeline_config_from_json(const Json& j, PipelineConfig base = {});

Json to_json(const KnowledgeSpec& k);

/// {format_version, trace_id, pin, timestamps_ms, typist_mode, clip}
Json truth_record(const KeystrokeTrace& trace, const std::string& clip_file);
KeystrokeTrace trace_from_truth_record(const Json& j);

Json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const Json& j);

Json to_json(const MatchReport& r);

/// {format_version, trace_id, timestamps_ms, peak_levels, floor, level, [match]}
Json detection_record(const std::string& trace_id, const DetectionResult& d, const std::optional<MatchReport>& match);

/// Candidates truncated to top_n (0 keeps all); true_rank null when filtered out.
Json ranking_record(const std::string& trace_id, const PinRanking& r, std::size_t top_n,
                    const std::optional<Pin>& truth, const std::optional<std::size_t>& rank);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);
std::vector<Json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records);

/// Reads truth.jsonl of a dataset directory.
std::vector<KeystrokeTrace> read_truth(const std::filesystem::path& dataset_dir);

}  // namespace pinaudio
