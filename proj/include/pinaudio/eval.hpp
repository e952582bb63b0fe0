#pragma once

// Guessing curves, random-guess baselines, per-PIN P50, and extraction
// error summaries.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinaudio/audio.hpp"
#include "pinaudio/keypad.hpp"
#include "pinaudio/stats.hpp"

namespace pinaudio {

/// 1-based attempts, nullopt when the true PIN was filtered out.
using Rank = std::optional<std::size_t>;

struct GuessingCdf {
  std::string label;
  std::size_t n_trials = 0;
  std::vector<std::size_t> hits;  // hits[k-1] = #trials with rank <= k
  std::vector<double> cdf;        // hits / n_trials

  std::size_t k_max() const { return cdf.size(); }
  double at(std::size_t k) const;  // k in 1..k_max
  std::size_t hits_at(std::size_t k) const;
};

/// Throws InvalidInput on empty input or k_max == 0.
GuessingCdf guessing_cdf(std::span<const Rank> ranks, std::size_t k_max, std::string label = {});

enum class BaselineKind { RG, RGVPK, RGT, RGTVPK };

std::string to_string(BaselineKind kind);
BaselineKind parse_baseline(const std::string& text);

/// Random guessing inside a per-trial candidate space: value(k) is the mean
/// of min(1, k / |space|) over trials.
class Baseline {
 public:
  static Baseline rg();
  static Baseline rgvpk();
  /// Thermal class of each trial PIN: spaces of 1, 14, 36 or 24.
  static Baseline rgt(std::span<const Pin> trial_pins);
  /// Thermal class further restricted to the digit at `position`.
  static Baseline rgtvpk(std::span<const Pin> trial_pins, int position);
  static Baseline make(BaselineKind kind, std::span<const Pin> trial_pins, int vpk_position = 0);

  BaselineKind kind() const { return kind_; }
  double at(std::size_t k) const;

 private:
  Baseline(BaselineKind kind, std::map<std::size_t, std::size_t> space_counts)
      : kind_(kind), space_counts_(std::move(space_counts)) {}

  BaselineKind kind_;
  std::map<std::size_t, std::size_t> space_counts_;  // space size -> #trials
};

/// cdf(k) / baseline(k). Throws InvalidInput when baseline(k) is zero.
double improvement_factor(const GuessingCdf& cdf, const Baseline& base, std::size_t k);

struct P50Record {
  Pin pin;
  std::size_t trials = 0;
  std::optional<std::size_t> attempts;  // nullopt: found in under half the trials

  bool defined() const { return attempts.has_value(); }
};

/// Sorted by attempts (undefined last), ties by PIN. Throws InvalidInput if
/// a PIN has fewer than two trials.
std::vector<P50Record> p50(const std::map<Pin, std::vector<Rank>>& per_pin_ranks);

/// 2x2 test of guessed-within-k between two conditions.
ChiSquareResult chi_square_guess_freq(const GuessingCdf& a, const GuessingCdf& b, std::size_t k, bool yates = true);

/// detected gap minus true gap, for consecutive truth events both matched.
std::vector<double> gap_errors(const MatchReport& report);

struct ExtractionSummary {
  std::size_t clips = 0;
  std::size_t truth_events = 0;
  std::size_t matched = 0;
  std::size_t misses = 0;
  std::size_t false_positives = 0;
  double detection_rate = 0.0;
  double mean_error_ms = 0.0;
  double std_error_ms = 0.0;
  std::size_t gap_count = 0;
  double mean_abs_gap_error_ms = 0.0;
  double p75_abs_gap_error_ms = 0.0;
  double p97_abs_gap_error_ms = 0.0;
  std::optional<AndersonDarlingResult> residual_normality;  // on signed errors, n >= 8
};

/// Throws InvalidInput on empty input.
ExtractionSummary extraction_error_report(std::span<const MatchReport> reports);

/// Rounded to four significant digits for reports.
double round_sig4(double v);

/// "k,<label>,..." CSV of one or more curves sharing k_max.
void write_cdf_csv(std::ostream& out, std::span<const GuessingCdf> curves);

/// Fixed-width table: rank, PIN, attempts per condition.
void write_p50_table(std::ostream& out, const std::vector<std::string>& labels,
                     const std::vector<std::vector<P50Record>>& columns, std::size_t top = 5);

}  // namespace pinaudio
