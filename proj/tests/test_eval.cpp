#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "pinaudio/error.hpp"
#include "pinaudio/eval.hpp"

using namespace pinaudio;

TEST_CASE("guessing_cdf examples") {
  const std::vector<Rank> ranks{1, 1, 2};
  const auto g = guessing_cdf(ranks, 2, "BA");
  CHECK(g.cdf == std::vector<double>{2.0 / 3.0, 1.0});
  CHECK(g.hits == std::vector<std::size_t>{2, 3});
  CHECK(g.at(1) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(g.at(0), InvalidInput);
  CHECK_THROWS_AS(g.at(3), InvalidInput);

  const std::vector<Rank> none{std::nullopt, std::nullopt};
  const auto z = guessing_cdf(none, 5);
  for (double v : z.cdf) CHECK(v == 0.0);
  CHECK_THROWS_AS(guessing_cdf(std::vector<Rank>{}, 5), InvalidInput);
  CHECK_THROWS_AS(guessing_cdf(ranks, 0), InvalidInput);
}

TEST_CASE("uniform random ranks track k/10000 within 3 sigma") {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<std::size_t> u(1, 10000);
  std::vector<Rank> ranks(20000);
  for (auto& r : ranks) r = u(rng);
  const auto g = guessing_cdf(ranks, 1000);
  for (std::size_t k : {10u, 100u, 500u, 1000u}) {
    const double p = k / 10000.0;
    const double sigma = std::sqrt(p * (1 - p) / 20000.0);
    CHECK(std::abs(g.at(k) - p) <= 3 * sigma);
  }
  for (std::size_t k = 2; k <= g.k_max(); ++k) CHECK(g.at(k) >= g.at(k - 1));
}

TEST_CASE("closed-form baselines") {
  CHECK(Baseline::rg().at(5) == 5.0 / 10000.0);
  CHECK(Baseline::rg().at(20000) == 1.0);
  CHECK(Baseline::rgvpk().at(5) == 5.0 / 1000.0);
  CHECK(parse_baseline("rgtvpk") == BaselineKind::RGTVPK);
  CHECK(to_string(BaselineKind::RGT) == "RGT");
  CHECK_THROWS_AS(parse_baseline("xyz"), InvalidInput);

  const std::vector<Pin> pins{Pin::parse("1111"), Pin::parse("1122"), Pin::parse("1234")};
  const auto t = Baseline::rgt(pins);
  CHECK(t.at(1) == doctest::Approx((1.0 + 1.0 / 14 + 1.0 / 24) / 3.0));
  // VPK on position 0 of 1234 leaves 6 orders; of 1122 leaves 7 (1 first)
  const auto tv = Baseline::rgtvpk(pins, 0);
  CHECK(tv.at(1) == doctest::Approx((1.0 + 1.0 / 7 + 1.0 / 6) / 3.0));
  CHECK_THROWS_AS(Baseline::rgt(std::vector<Pin>{}), InvalidInput);
  CHECK(Baseline::make(BaselineKind::RG, {}).at(100) == 0.01);
}

TEST_CASE("RGT matches a random-guessing simulation within binomial error") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> pick(0, kPinSpace - 1);
  std::vector<Pin> pins;
  std::vector<Rank> ranks;
  for (int i = 0; i < 20000; ++i) {
    const Pin p = Pin::from_number(pick(rng));
    pins.push_back(p);
    std::uniform_int_distribution<std::size_t> r(1, thermal_candidates(KeySet::of_pin(p)).size());
    ranks.push_back(r(rng));
  }
  const auto base = Baseline::rgt(pins);
  const auto g = guessing_cdf(ranks, 10);
  for (std::size_t k = 1; k <= 10; ++k) {
    const double p = base.at(k);
    CHECK(std::abs(g.at(k) - p) <= 3 * std::sqrt(p * (1 - p) / 20000.0));
  }
}

TEST_CASE("improvement_factor") {
  std::vector<Rank> ranks(1000);
  for (std::size_t i = 0; i < 17; ++i) ranks[i] = 1;
  const auto g = guessing_cdf(ranks, 5);
  CHECK(improvement_factor(g, Baseline::rg(), 5) == doctest::Approx(34.0));
  const std::vector<Rank> uniform{1, std::nullopt};
  CHECK(improvement_factor(guessing_cdf(uniform, 1), Baseline::make(BaselineKind::RGT, std::vector<Pin>{Pin::parse("5555"), Pin::parse("5555")}), 1) ==
        doctest::Approx(0.5));
}

TEST_CASE("p50 examples") {
  std::map<Pin, std::vector<Rank>> m;
  m[Pin::parse("1111")] = {3, 1, 7, 2};          // need 2 hits: sorted 1,2 -> 2
  m[Pin::parse("2222")] = {5, std::nullopt, 9};  // need 2: 5,9 -> 9
  m[Pin::parse("0000")] = {2, std::nullopt, std::nullopt};  // 1 of 3 -> undefined
  m[Pin::parse("3333")] = {2, 2};                // -> 2, ties 1111 broken by PIN
  const auto r = p50(m);
  REQUIRE(r.size() == 4);
  CHECK(r[0].pin.str() == "1111");
  CHECK(*r[0].attempts == 2);
  CHECK(r[1].pin.str() == "3333");
  CHECK(*r[2].attempts == 9);
  CHECK_FALSE(r[3].defined());
  CHECK(r[3].pin.str() == "0000");

  std::map<Pin, std::vector<Rank>> one{{Pin::parse("1234"), {1}}};
  CHECK_THROWS_AS(p50(one), InvalidInput);

  std::ostringstream out;
  write_p50_table(out, {"BA+SFP"}, {r}, 2);
  CHECK(out.str().find("1111 / 2") != std::string::npos);
  CHECK(out.str().find("3333 / 2") != std::string::npos);
}

TEST_CASE("chi_square_guess_freq is symmetric") {
  std::vector<Rank> a(100), b(100);
  for (std::size_t i = 0; i < 90; ++i) a[i] = 1;
  for (std::size_t i = 0; i < 50; ++i) b[i] = 3;
  const auto ga = guessing_cdf(a, 5), gb = guessing_cdf(b, 5);
  CHECK(chi_square_guess_freq(ga, gb, 5).statistic == doctest::Approx(36.214286).epsilon(1e-8));
  CHECK(chi_square_guess_freq(ga, gb, 5).statistic == chi_square_guess_freq(gb, ga, 5).statistic);
  CHECK(chi_square_guess_freq(ga, gb, 5, false).statistic == doctest::Approx(38.095238).epsilon(1e-8));
}

TEST_CASE("gap errors and extraction summary") {
  const std::vector<double> truth{100, 400, 800, 1200};
  const auto r1 = match_ground_truth(std::vector<double>{102, 405, 799, 1203}, truth, 25.0);
  CHECK(gap_errors(r1) == std::vector<double>{3.0, -6.0, 4.0});
  const auto r2 = match_ground_truth(std::vector<double>{101, 806, 1201}, truth, 25.0);  // second missed
  CHECK(gap_errors(r2) == std::vector<double>{-5.0});

  const std::vector<MatchReport> reps{r1, r2};
  const auto s = extraction_error_report(reps);
  CHECK(s.clips == 2);
  CHECK(s.truth_events == 8);
  CHECK(s.matched == 7);
  CHECK(s.misses == 1);
  CHECK(s.detection_rate == doctest::Approx(7.0 / 8.0));
  CHECK(s.gap_count == 4);
  CHECK(s.mean_abs_gap_error_ms == doctest::Approx(4.5));
  CHECK_FALSE(s.residual_normality.has_value());  // 7 matched errors
  CHECK_THROWS_AS(extraction_error_report(std::vector<MatchReport>{}), InvalidInput);
}

TEST_CASE("round_sig4 and cdf csv") {
  CHECK(round_sig4(0.0123456) == doctest::Approx(0.01235));
  CHECK(round_sig4(123456.0) == 123500.0);
  CHECK(round_sig4(0.0) == 0.0);
  const std::vector<Rank> ranks{1, 2, std::nullopt};
  const std::vector<GuessingCdf> curves{guessing_cdf(ranks, 2, "BA"), guessing_cdf(ranks, 2, "TA")};
  std::ostringstream out;
  write_cdf_csv(out, curves);
  CHECK(out.str() == "k,BA,TA\n1,0.3333,0.3333\n2,0.6667,0.6667\n");
}
