#pragma once

// Per-distance-class gap models and likelihood ranking of distance triplets.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinaudio/gamma.hpp"
#include "pinaudio/keypad.hpp"
#include "pinaudio/trace.hpp"

namespace pinaudio {

struct ClassModel {
  GammaParams params;
  std::size_t samples = 0;
  bool fallback = true;  // true when params were copied from the pooled fit
};

struct TimingModel {
  static constexpr int kFormatVersion = 1;

  std::string model_id;
  TypistMode typist_mode = TypistMode::mixed;
  std::size_t min_samples = 10;
  GammaParams global;
  std::size_t global_samples = 0;
  std::array<ClassModel, kNumClasses> classes{};
  /// Pearson correlation between key distance and gap over the training set.
  double distance_correlation = 0.0;

  const GammaParams& params(DistanceClass c) const { return classes[index_of(c)].params; }

  /// Timing carries no distance information when |r| falls below this.
  static constexpr double kFlatCorrelation = 0.1;
  bool distance_flat() const;

  /// Every class shares `params`: an uninformative model.
  static TimingModel uniform(const GammaParams& params, std::string model_id = "uniform");
  static TimingModel from_class_params(const std::array<GammaParams, kNumClasses>& params,
                                       TypistMode mode, std::string model_id);
};

struct FitOptions {
  std::size_t min_samples = 10;
  std::optional<TypistMode> mode_filter;
  int max_newton_iterations = 50;
};

struct TraceDiagnostic {
  std::string trace_id;
  std::string message;
};

struct FitReport {
  TimingModel model;
  std::size_t traces_used = 0;
  std::vector<TraceDiagnostic> rejected;
};

/// Throws DataError when no usable trace remains or all gaps are identical.
FitReport fit_model(std::span<const KeystrokeTrace> traces, const KeypadLayout& layout = KeypadLayout::standard(),
                    const FitOptions& options = {});

double gap_log_likelihood(const TimingModel& model, DistanceClass c, double gap_ms);

struct ScoredTriplet {
  DistanceTriplet triplet;
  double score = 0.0;  // summed log-likelihood
};

/// Feasible triplets, best first; equal scores keep canonical order.
using RankedTriplets = std::vector<ScoredTriplet>;

RankedTriplets rank_triplets(const TimingModel& model, const GapSequence& gaps,
                             const TripletIndex& index = TripletIndex::standard());

// Plain-text key/value serialization.
void write_model(std::ostream& out, const TimingModel& model);
TimingModel read_model(std::istream& in);  // throws DataError
void save_model(const std::string& path, const TimingModel& model);
TimingModel load_model(const std::string& path);

}  // namespace pinaudio
