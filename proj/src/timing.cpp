#include "pinaudio/timing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "pinaudio/error.hpp"
#include "pinaudio/util.hpp"

namespace pinaudio {

// ---------------------------------------------------------------------------
// trace.hpp

std::string_view to_string(TypistMode mode) {
  switch (mode) {
    case TypistMode::single_finger: return "single_finger";
    case TypistMode::other: return "other";
    case TypistMode::mixed: return "mixed";
  }
  return "mixed";
}

TypistMode parse_typist_mode(std::string_view text) {
  if (text == "single_finger" || text == "sfp") return TypistMode::single_finger;
  if (text == "other" || text == "op") return TypistMode::other;
  if (text == "mixed") return TypistMode::mixed;
  throw InvalidInput("unknown typist mode: '" + std::string(text) + "'");
}

GapSequence::GapSequence(const std::array<double, 3>& gaps_ms) : gaps_(gaps_ms) {
  for (double g : gaps_) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw InvalidInput("inter-keystroke gap must be positive, got " + std::to_string(g));
    }
  }
}

GapSequence GapSequence::from_timestamps(std::span<const double> ts) {
  if (ts.size() != kPinLength) {
    throw InvalidInput("a PIN entry needs exactly 4 timestamps, got " + std::to_string(ts.size()));
  }
  return GapSequence({ts[1] - ts[0], ts[2] - ts[1], ts[3] - ts[2]});
}

bool GapSequence::below_normal_floor() const {
  return std::any_of(gaps_.begin(), gaps_.end(), [](double g) { return g < kNormalFloorMs; });
}

// ---------------------------------------------------------------------------
// TimingModel

bool TimingModel::distance_flat() const { return std::abs(distance_correlation) < kFlatCorrelation; }

TimingModel TimingModel::uniform(const GammaParams& params, std::string model_id) {
  std::array<GammaParams, kNumClasses> all;
  all.fill(params);
  return from_class_params(all, TypistMode::mixed, std::move(model_id));
}

TimingModel TimingModel::from_class_params(const std::array<GammaParams, kNumClasses>& params, TypistMode mode,
                                           std::string model_id) {
  TimingModel m;
  m.model_id = std::move(model_id);
  m.typist_mode = mode;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (!(params[i].shape > 0.0) || !(params[i].scale > 0.0)) {
      throw InvalidInput("gamma parameters must be positive");
    }
    m.classes[i] = ClassModel{params[i], 0, false};
  }
  // Pooled parameters: moment match of the equal-weight mixture.
  double mean = 0.0;
  double second = 0.0;
  for (const auto& p : params) {
    mean += p.mean() / kNumClasses;
    second += (p.variance() + p.mean() * p.mean()) / kNumClasses;
  }
  const double var = second - mean * mean;
  m.global = {mean * mean / var, var / mean};
  return m;
}

namespace {

std::string model_body(const TimingModel& m, bool with_id) {
  std::ostringstream out;
  out << "pinaudio-timing-model\n";
  out << "format_version " << TimingModel::kFormatVersion << '\n';
  if (with_id) out << "model_id " << m.model_id << '\n';
  out << "typist_mode " << to_string(m.typist_mode) << '\n';
  out << "min_samples " << m.min_samples << '\n';
  out << "distance_correlation " << format_double(m.distance_correlation) << '\n';
  out << "distance_flat " << (m.distance_flat() ? 1 : 0) << '\n';
  out << "global " << format_double(m.global.shape) << ' ' << format_double(m.global.scale) << ' '
      << m.global_samples << '\n';
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    const auto& c = m.classes[i];
    out << "class " << tag(kAllClasses[i]) << ' ' << format_double(c.params.shape) << ' '
        << format_double(c.params.scale) << ' ' << c.samples << ' ' << (c.fallback ? "fallback" : "fitted")
        << '\n';
  }
  return out.str();
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

FitReport fit_model(std::span<const KeystrokeTrace> traces, const KeypadLayout& layout, const FitOptions& options) {
  FitReport report;
  std::array<std::vector<double>, kNumClasses> per_class;
  std::vector<double> pooled;
  std::vector<double> distances;
  std::optional<TypistMode> common_mode;
  bool one_mode = true;

  for (const auto& tr : traces) {
    if (options.mode_filter && tr.mode != *options.mode_filter) continue;
    std::array<double, 3> gaps{};
    bool ok = true;
    for (std::size_t i = 0; i < 3; ++i) {
      gaps[i] = tr.timestamps_ms[i + 1] - tr.timestamps_ms[i];
      if (!(gaps[i] > 0.0) || !std::isfinite(gaps[i])) ok = false;
    }
    if (!ok) {
      report.rejected.push_back({tr.trace_id, "non-positive inter-keystroke gap"});
      continue;
    }
    const auto t = triplet_of_pin(tr.pin, layout);
    for (std::size_t i = 0; i < 3; ++i) {
      per_class[index_of(t.classes[i])].push_back(gaps[i]);
      pooled.push_back(gaps[i]);
      distances.push_back(euclidean_distance(t.classes[i]));
    }
    ++report.traces_used;
    if (common_mode && *common_mode != tr.mode) one_mode = false;
    common_mode = tr.mode;
  }
  if (report.traces_used == 0) throw DataError("training set is empty after filtering");

  TimingModel& m = report.model;
  // a model trained on one mode only is labelled with that mode
  m.typist_mode = one_mode ? *common_mode : TypistMode::mixed;
  m.min_samples = options.min_samples;
  const GammaFit global = fit_gamma(pooled, options.max_newton_iterations);
  m.global = global.params;
  m.global_samples = pooled.size();
  m.distance_correlation = pearson(distances, pooled);

  for (std::size_t i = 0; i < kNumClasses; ++i) {
    ClassModel& c = m.classes[i];
    c.samples = per_class[i].size();
    c.params = m.global;
    c.fallback = true;
    if (c.samples < std::max<std::size_t>(options.min_samples, 2)) continue;
    try {
      c.params = fit_gamma(per_class[i], options.max_newton_iterations).params;
      c.fallback = false;
    } catch (const DataError&) {
      // degenerate class sample: keep the pooled fit and the fallback flag
    }
  }
  m.model_id = std::string(to_string(m.typist_mode)) + "-" + hex64(fnv1a64(model_body(m, false))).substr(0, 12);
  return report;
}

double gap_log_likelihood(const TimingModel& model, DistanceClass c, double gap_ms) {
  return gamma_log_pdf(model.params(c), gap_ms);
}

RankedTriplets rank_triplets(const TimingModel& model, const GapSequence& gaps, const TripletIndex& index) {
  std::array<std::array<double, kNumClasses>, 3> ll{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t c = 0; c < kNumClasses; ++c) ll[i][c] = gap_log_likelihood(model, kAllClasses[c], gaps[i]);

  RankedTriplets ranked;
  ranked.reserve(kNumTriplets);
  for (std::size_t t = 0; t < kNumTriplets; ++t) {
    const auto triplet = DistanceTriplet::from_index(t);
    if (!index.feasible(triplet)) continue;
    const double score = ll[0][index_of(triplet.classes[0])] + ll[1][index_of(triplet.classes[1])] +
                         ll[2][index_of(triplet.classes[2])];
    ranked.push_back({triplet, score});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const ScoredTriplet& a, const ScoredTriplet& b) { return a.score > b.score; });
  return ranked;
}

// ---------------------------------------------------------------------------
// Serialization

void write_model(std::ostream& out, const TimingModel& model) { out << model_body(model, true); }

namespace {

double parse_number(const std::string& token, const std::string& line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw DataError("timing model: bad number '" + token + "' in line: " + line);
  }
}

}  // namespace

TimingModel read_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "pinaudio-timing-model") {
    throw DataError("timing model: missing 'pinaudio-timing-model' header");
  }
  TimingModel m;
  std::array<bool, kNumClasses> seen{};
  bool have_version = false, have_global = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    std::vector<std::string> rest;
    for (std::string tok; ls >> tok;) rest.push_back(tok);
    auto need = [&](std::size_t n) {
      if (rest.size() != n) throw DataError("timing model: malformed line: " + line);
    };
    if (key == "format_version") {
      need(1);
      if (rest[0] != std::to_string(TimingModel::kFormatVersion)) {
        throw DataError("timing model: unsupported format_version " + rest[0]);
      }
      have_version = true;
    } else if (key == "model_id") {
      need(1);
      m.model_id = rest[0];
    } else if (key == "typist_mode") {
      need(1);
      m.typist_mode = parse_typist_mode(rest[0]);
    } else if (key == "min_samples") {
      need(1);
      m.min_samples = static_cast<std::size_t>(parse_number(rest[0], line));
    } else if (key == "distance_correlation") {
      need(1);
      m.distance_correlation = parse_number(rest[0], line);
    } else if (key == "distance_flat") {
      need(1);  // derived from distance_correlation
    } else if (key == "global") {
      need(3);
      m.global = {parse_number(rest[0], line), parse_number(rest[1], line)};
      m.global_samples = static_cast<std::size_t>(parse_number(rest[2], line));
      have_global = true;
    } else if (key == "class") {
      need(5);
      const auto c = index_of(class_from_tag(rest[0]));
      m.classes[c].params = {parse_number(rest[1], line), parse_number(rest[2], line)};
      m.classes[c].samples = static_cast<std::size_t>(parse_number(rest[3], line));
      if (rest[4] != "fitted" && rest[4] != "fallback") throw DataError("timing model: bad class flag: " + line);
      m.classes[c].fallback = rest[4] == "fallback";
      seen[c] = true;
    } else {
      throw DataError("timing model: unknown key '" + key + "'");
    }
  }
  if (!have_version) throw DataError("timing model: missing format_version");
  if (!have_global) throw DataError("timing model: missing global row");
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (!seen[i]) throw DataError("timing model: missing class row " + std::string(tag(kAllClasses[i])));
    const auto& p = m.classes[i].params;
    if (!(p.shape > 0.0) || !(p.scale > 0.0)) throw DataError("timing model: non-positive gamma parameter");
  }
  return m;
}

void save_model(const std::string& path, const TimingModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file: " + path);
  write_model(out, model);
  if (!out) throw DataError("write failed: " + path);
}

TimingModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  return read_model(in);
}

}  // namespace pinaudio
