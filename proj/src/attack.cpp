#include "pinaudio/attack.hpp"

#include <algorithm>
#include <stdexcept>

#include "pinaudio/error.hpp"

namespace pinaudio {

void KnowledgeSpec::validate() const {
  if (vpk) {
    if (vpk->position < 0 || vpk->position >= kPinLength) {
      throw InvalidInput("VPK position must be 0..3, got " + std::to_string(vpk->position));
    }
    if (vpk->digit < 0 || vpk->digit >= kNumDigits) {
      throw InvalidInput("VPK digit must be 0..9, got " + std::to_string(vpk->digit));
    }
  }
  if (thermal_keys) {
    if (thermal_keys->empty() || thermal_keys->size() > kPinLength) {
      throw InvalidInput("thermal key set must hold 1 to 4 digits");
    }
    if (vpk && !thermal_keys->contains(vpk->digit)) {
      throw InvalidInput("knowledge is contradictory: VPK digit " + std::to_string(vpk->digit) +
                         " is not in the thermal key set {" + thermal_keys->str() + "}");
    }
  }
}

std::string KnowledgeSpec::label() const {
  std::string s;
  if (thermal_keys) s = "TA";
  if (vpk) s += (s.empty() ? "VPK" : "+VPK") + std::to_string(vpk->position + 1);
  if (s.empty()) s = "BA";
  if (typist_mode == TypistMode::single_finger) s += "+SFP";
  if (typist_mode == TypistMode::other) s += "+OP";
  return s;
}

PinRanking base_attack(const TimingModel& model, const GapSequence& gaps, const TripletIndex& index) {
  PinRanking r;
  r.model_id = model.model_id;
  r.candidates.reserve(kPinSpace);
  for (const auto& st : rank_triplets(model, gaps, index)) {
    for (const Pin& p : index.pins(st.triplet)) r.candidates.push_back({p, st.score});
  }
  return r;
}

PinRanking filter_vpk(PinRanking ranking, int position, int digit) {
  KnowledgeSpec k = ranking.knowledge;
  k.vpk = Vpk{position, digit};
  KnowledgeSpec only_vpk;
  only_vpk.vpk = k.vpk;
  only_vpk.validate();
  std::erase_if(ranking.candidates,
                [&](const ScoredPin& c) { return c.pin.digit(static_cast<std::size_t>(position)) != digit; });
  ranking.knowledge = k;
  return ranking;
}

PinRanking filter_thermal(PinRanking ranking, const KeySet& keys) {
  if (keys.empty() || keys.size() > kPinLength) throw InvalidInput("thermal key set must hold 1 to 4 digits");
  std::erase_if(ranking.candidates, [&](const ScoredPin& c) { return !(KeySet::of_pin(c.pin) == keys); });
  ranking.knowledge.thermal_keys = keys;
  return ranking;
}

const TimingModel& select_model(const ModelBank& bank, std::optional<TypistMode> mode) {
  if (mode) {
    if (auto it = bank.find(*mode); it != bank.end()) return it->second;
  }
  if (auto it = bank.find(TypistMode::mixed); it != bank.end()) return it->second;
  if (!mode && bank.size() == 1) return bank.begin()->second;  // no assumption: the only model
  throw InvalidInput("no timing model for typist mode '" +
                     std::string(to_string(mode.value_or(TypistMode::mixed))) + "' and no mixed fallback");
}

PinRanking run_attack(const ModelBank& bank, const GapSequence& gaps, const KnowledgeSpec& knowledge,
                      const TripletIndex& index) {
  knowledge.validate();
  PinRanking base = base_attack(select_model(bank, knowledge.typist_mode), gaps, index);
  base.knowledge.typist_mode = knowledge.typist_mode;

  if (knowledge.thermal_keys && knowledge.vpk) {
    PinRanking a = filter_vpk(filter_thermal(base, *knowledge.thermal_keys), knowledge.vpk->position,
                              knowledge.vpk->digit);
    const PinRanking b = filter_thermal(filter_vpk(std::move(base), knowledge.vpk->position, knowledge.vpk->digit),
                                        *knowledge.thermal_keys);
    const bool same = a.candidates.size() == b.candidates.size() &&
                      std::equal(a.candidates.begin(), a.candidates.end(), b.candidates.begin(),
                                 [](const ScoredPin& x, const ScoredPin& y) { return x.pin == y.pin; });
    if (!same) throw std::logic_error("thermal and VPK filters do not commute");
    return a;
  }
  if (knowledge.thermal_keys) return filter_thermal(std::move(base), *knowledge.thermal_keys);
  if (knowledge.vpk) return filter_vpk(std::move(base), knowledge.vpk->position, knowledge.vpk->digit);
  return base;
}

std::optional<std::size_t> attempts_to_guess(const PinRanking& ranking, const Pin& truth) {
  for (std::size_t i = 0; i < ranking.candidates.size(); ++i) {
    if (ranking.candidates[i].pin == truth) return i + 1;
  }
  return std::nullopt;
}

}  // namespace pinaudio
