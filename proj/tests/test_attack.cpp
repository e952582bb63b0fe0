#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "pinaudio/attack.hpp"
#include "pinaudio/error.hpp"

using namespace pinaudio;

namespace {

TimingModel separated_model() {
  std::array<GammaParams, kNumClasses> p{};
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    const double mean = 150.0 + 450.0 * euclidean_distance(kAllClasses[i]) / std::sqrt(10.0);
    p[i] = {50.0, mean / 50.0};
  }
  return TimingModel::from_class_params(p, TypistMode::single_finger, "separated");
}

GapSequence typical_gaps(const Pin& pin) {
  const auto t = triplet_of_pin(pin);
  std::array<double, 3> g{};
  for (std::size_t i = 0; i < 3; ++i) g[i] = 150.0 + 450.0 * euclidean_distance(t.classes[i]) / std::sqrt(10.0);
  return GapSequence(g);
}

bool is_subsequence(const PinRanking& sub, const PinRanking& full) {
  std::size_t j = 0;
  for (const auto& c : full.candidates)
    if (j < sub.candidates.size() && sub.candidates[j].pin == c.pin) ++j;
  return j == sub.candidates.size();
}

}  // namespace

TEST_CASE("base_attack ranks every PIN exactly once") {
  const auto r = base_attack(separated_model(), GapSequence({200, 300, 400}));
  REQUIRE(r.candidates.size() == 10000);
  std::set<Pin> seen;
  for (const auto& c : r.candidates) seen.insert(c.pin);
  CHECK(seen.size() == 10000);
  for (std::size_t i = 1; i < r.candidates.size(); ++i) CHECK(r.candidates[i - 1].score >= r.candidates[i].score);
  CHECK(r.model_id == "separated");
}

TEST_CASE("base_attack example: Z,U3,Z timing puts 0022 and 2200 first") {
  const auto r = base_attack(separated_model(), typical_gaps(Pin::parse("0022")));
  std::set<Pin> top{r.candidates[0].pin, r.candidates[1].pin};
  CHECK(top == std::set<Pin>{Pin::parse("0022"), Pin::parse("2200")});
  CHECK(attempts_to_guess(r, Pin::parse("0022")).value() <= 2);
}

TEST_CASE("uninformative model: canonical triplet order, then ascending PIN") {
  const auto r = base_attack(TimingModel::uniform({5.0, 60.0}), GapSequence({300, 300, 300}));
  CHECK(r.candidates.front().pin.str() == "0000");  // Z,Z,Z bucket first
  CHECK(r.candidates[9].pin.str() == "9999");
  const auto& index = TripletIndex::standard();
  std::size_t pos = 0;
  for (std::size_t t = 0; t < kNumTriplets; ++t) {
    for (const Pin& p : index.pins(DistanceTriplet::from_index(t))) CHECK(r.candidates[pos++].pin == p);
  }
}

TEST_CASE("expected rank under an uninformative model is about 5000.5") {
  const auto r = base_attack(TimingModel::uniform({5.0, 60.0}), GapSequence({300, 300, 300}));
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> pick(0, kPinSpace - 1);
  double sum = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(*attempts_to_guess(r, Pin::from_number(pick(rng))));
  CHECK(std::abs(sum / n / 5000.5 - 1.0) < 0.02);
}

TEST_CASE("filter_vpk keeps base order and 1000 candidates") {
  const auto base = base_attack(separated_model(), GapSequence({180, 500, 250}));
  const auto v = filter_vpk(base, 0, 7);
  CHECK(v.candidates.size() == 1000);
  CHECK(std::all_of(v.candidates.begin(), v.candidates.end(), [](const ScoredPin& c) { return c.pin.digit(0) == 7; }));
  CHECK(is_subsequence(v, base));
  CHECK(v.knowledge.label() == "VPK1");
  CHECK_THROWS_AS(filter_vpk(base, 4, 1), InvalidInput);
  CHECK_THROWS_AS(filter_vpk(base, 0, 10), InvalidInput);
}

TEST_CASE("filter_thermal sizes and soundness") {
  const auto base = base_attack(separated_model(), GapSequence({180, 500, 250}));
  CHECK(filter_thermal(base, KeySet::parse("5")).candidates.size() == 1);
  CHECK(filter_thermal(base, KeySet::parse("0,2")).candidates.size() == 14);
  CHECK(filter_thermal(base, KeySet::parse("1,2,3")).candidates.size() == 36);
  const auto t4 = filter_thermal(base, KeySet::parse("1,3,7,9"));
  CHECK(t4.candidates.size() == 24);
  CHECK(is_subsequence(t4, base));
  CHECK(attempts_to_guess(t4, Pin::parse("1379")).has_value());
  CHECK_FALSE(attempts_to_guess(t4, Pin::parse("1111")).has_value());
  CHECK_THROWS_AS(filter_thermal(base, KeySet{}), InvalidInput);
  CHECK_THROWS_AS(filter_thermal(base, KeySet::parse("1,2,3,4,5")), InvalidInput);
}

TEST_CASE("filters commute as ordered sets") {
  const auto base = base_attack(separated_model(), GapSequence({420, 160, 330}));
  const KeySet keys = KeySet::parse("2,5,8");
  const auto a = filter_vpk(filter_thermal(base, keys), 1, 5);
  const auto b = filter_thermal(filter_vpk(base, 1, 5), keys);
  REQUIRE(a.candidates.size() == b.candidates.size());
  for (std::size_t i = 0; i < a.candidates.size(); ++i) CHECK(a.candidates[i].pin == b.candidates[i].pin);
  CHECK(a.knowledge.label() == "TA+VPK2");
  CHECK(b.knowledge.label() == "TA+VPK2");
}

TEST_CASE("KnowledgeSpec labels and validation") {
  KnowledgeSpec k;
  CHECK(k.label() == "BA");
  k.typist_mode = TypistMode::other;
  CHECK(k.label() == "BA+OP");
  k.vpk = Vpk{0, 3};
  k.typist_mode = TypistMode::single_finger;
  CHECK(k.label() == "VPK1+SFP");
  k.thermal_keys = KeySet::parse("1,2");
  CHECK_THROWS_AS(k.validate(), InvalidInput);  // digit 3 is not among the keys
  k.thermal_keys = KeySet::parse("1,3");
  CHECK_NOTHROW(k.validate());
  CHECK(k.label() == "TA+VPK1+SFP");
}

TEST_CASE("select_model and run_attack") {
  ModelBank bank;
  CHECK_THROWS_AS(select_model(bank, TypistMode::other), InvalidInput);
  bank[TypistMode::mixed] = TimingModel::uniform({5.0, 60.0}, "mixed-model");
  bank[TypistMode::single_finger] = separated_model();
  CHECK(select_model(bank, TypistMode::other).model_id == "mixed-model");
  CHECK(select_model(bank, std::nullopt).model_id == "mixed-model");
  CHECK(select_model(bank, TypistMode::single_finger).model_id == "separated");

  const Pin truth = Pin::parse("1590");
  KnowledgeSpec k;
  k.typist_mode = TypistMode::single_finger;
  k.vpk = Vpk{0, 1};
  k.thermal_keys = KeySet::of_pin(truth);
  const auto r = run_attack(bank, typical_gaps(truth), k);
  CHECK(r.model_id == "separated");
  CHECK(r.candidates.size() <= 24);
  CHECK(attempts_to_guess(r, truth).has_value());
  CHECK(r.knowledge.label() == "TA+VPK1+SFP");

  // knowledge inconsistent with the truth: sound rejection
  KnowledgeSpec wrong;
  wrong.vpk = Vpk{0, 2};
  CHECK_FALSE(attempts_to_guess(run_attack(bank, typical_gaps(truth), wrong), truth).has_value());
}

TEST_CASE("filters never remove a consistent truth PIN") {
  const auto model = separated_model();
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> pick(0, kPinSpace - 1), pos(0, 3);
  for (int i = 0; i < 100; ++i) {
    const Pin truth = Pin::from_number(pick(rng));
    const int p = pos(rng);
    const auto base = base_attack(model, typical_gaps(truth));
    const auto both = filter_vpk(filter_thermal(base, KeySet::of_pin(truth)), p, truth.digit(static_cast<std::size_t>(p)));
    const auto rb = attempts_to_guess(base, truth);
    const auto rf = attempts_to_guess(both, truth);
    REQUIRE(rf.has_value());
    CHECK(*rf <= *rb);
  }
}
