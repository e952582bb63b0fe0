#pragma once

// Timing-driven PIN ranking and its composition with side-channel knowledge.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pinaudio/keypad.hpp"
#include "pinaudio/timing.hpp"

namespace pinaudio {

/// Value-position knowledge: the digit at one position of the PIN.
struct Vpk {
  int position = 0;  // 0..3
  int digit = 0;

  friend bool operator==(const Vpk&, const Vpk&) = default;
};

struct KnowledgeSpec {
  std::optional<Vpk> vpk;
  std::optional<KeySet> thermal_keys;
  std::optional<TypistMode> typist_mode;

  /// Throws InvalidInput: bad position/digit, key set outside 1..4, or a
  /// VPK digit missing from the thermal key set.
  void validate() const;

  /// "BA", "VPK1", "TA", "TA+VPK1+SFP", ...
  std::string label() const;
};

struct ScoredPin {
  Pin pin;
  double score = 0.0;
};

struct PinRanking {
  std::vector<ScoredPin> candidates;  // best first
  KnowledgeSpec knowledge;
  std::string model_id;
};

/// Walk the likelihood-ranked triplets and emit each triplet's PINs in
/// ascending order; every PIN scores its triplet's log-likelihood.
PinRanking base_attack(const TimingModel& model, const GapSequence& gaps,
                       const TripletIndex& index = TripletIndex::standard());

PinRanking filter_vpk(PinRanking ranking, int position, int digit);
PinRanking filter_thermal(PinRanking ranking, const KeySet& keys);

using ModelBank = std::map<TypistMode, TimingModel>;

/// Model for the requested mode, else the mixed model, else (no mode given)
/// the bank's only model. Throws InvalidInput naming the mode otherwise.
const TimingModel& select_model(const ModelBank& bank, std::optional<TypistMode> mode);

/// Mode-conditioned base attack followed by the thermal and VPK filters.
PinRanking run_attack(const ModelBank& bank, const GapSequence& gaps, const KnowledgeSpec& knowledge,
                      const TripletIndex& index = TripletIndex::standard());

/// 1-based position of `truth`; nullopt when filtered out.
std::optional<std::size_t> attempts_to_guess(const PinRanking& ranking, const Pin& truth);

}  // namespace pinaudio
