#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "deckmotion/rng.hpp"
#include "deckmotion/wavegen.hpp"
#include "oracles.hpp"

using namespace deckmotion;

TEST_CASE("knox model coefficients") {
  const WaveModel m = knox_training_model();
  CHECK(m[Channel::heave][0] == SineComponent{0.2172, 0.4, 0.0});
  CHECK(m[Channel::roll][1] == SineComponent{0.0431, 0.54, 0.0});
  for (Channel c : kChannels) CHECK(m[c].size() == 4);
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("sea state 5 reference model") {
  const WaveModel m = sea_state5_reference_model();
  CHECK(m[Channel::roll][3] == SineComponent{3.0, 0.785, 0.0});
  CHECK(m.amplitude_sum(Channel::pitch) == doctest::Approx(1.975).epsilon(1e-15));
  CHECK(m.amplitude_sum(Channel::heave) == doctest::Approx(1.55).epsilon(1e-15));
  CHECK(m.amplitude_sum(Channel::roll) == doctest::Approx(9.9).epsilon(1e-15));
  const SeaStateSpec spec = sea_state5_spec();
  CHECK(spec[Channel::pitch].amplitude_sum.contains_open(m.amplitude_sum(Channel::pitch)));

  // Roll periods 2*pi/omega: 13.0087, 12.566, 10.472, 8.0041. The lowest
  // frequency sits just past the 13 s upper bound of the roll period range.
  const double periods[] = {13.008665232255873, 12.566370614359172, 10.471975511965978,
                            8.004057716152339};
  for (int k = 0; k < 4; ++k)
    CHECK(2.0 * std::numbers::pi / m[Channel::roll][k].omega ==
          doctest::Approx(periods[k]).epsilon(1e-14));
  CHECK_FALSE(spec[Channel::roll].period.contains_open(periods[0]));
  for (int k = 1; k < 4; ++k) CHECK(spec[Channel::roll].period.contains_open(periods[k]));
}

TEST_CASE("evaluate_model") {
  const WaveModel knox = knox_training_model();
  const Motion zero = evaluate_model(knox, 0.0);
  CHECK(zero == Motion{0.0, 0.0, 0.0});

  // 30-digit evaluation of the four heave terms at t = 1.
  const Motion at1 = evaluate_model(knox, 1.0);
  CHECK(at1[0] == doctest::Approx(0.656869718238790679).epsilon(1e-14));
  CHECK(at1[1] == doctest::Approx(0.0182528074705442530).epsilon(1e-14));
  CHECK(at1[2] == doctest::Approx(0.0619938828569112500).epsilon(1e-14));

  SUBCASE("triangle bound, oddness, linearity") {
    Rng rng(3);
    WaveModel scaled = knox;
    for (auto& ch : scaled.channels)
      for (auto& s : ch) s.amplitude *= 2.5;
    for (int trial = 0; trial < 500; ++trial) {
      const double t = rng.uniform(-500.0, 500.0);
      const Motion v = evaluate_model(knox, t);
      const Motion neg = evaluate_model(knox, -t);
      const Motion sv = evaluate_model(scaled, t);
      for (Channel c : kChannels) {
        const int i = static_cast<int>(c);
        CHECK(std::abs(v[i]) <= knox.amplitude_sum(c));
        CHECK(neg[i] == doctest::Approx(-v[i]).epsilon(1e-12));
        CHECK(sv[i] == doctest::Approx(2.5 * v[i]).epsilon(1e-12));
      }
      CHECK(std::abs(v[0]) <= 1.2705 + 1e-15);
    }
  }
}

TEST_CASE("sea state 5 envelope") {
  const SeaStateSpec s = sea_state5_spec();
  CHECK(s[Channel::roll].period == Range{8.0, 13.0});
  CHECK(s[Channel::pitch].amplitude_sum == Range{1.3, 2.5});
  CHECK(s[Channel::heave].amplitude_sum == Range{1.0, 1.9});
  CHECK(s.components_per_channel == 4);
  for (Channel c : kChannels) {
    CHECK(s[c].period.low < s[c].period.high);
    CHECK(s[c].amplitude_sum.low < s[c].amplitude_sum.high);
  }
}

TEST_CASE("random sea state generator") {
  const SeaStateSpec spec = sea_state5_spec();

  SUBCASE("constraints hold") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const WaveModel m = random_sea_state_model(spec, seed);
      CHECK(oracle::count_violations(m, spec) == 0);
      CHECK(check_against_spec(m, spec).empty());
      for (Channel c : kChannels) {
        CHECK(m[c].size() == 4);
        for (const auto& s : m[c]) CHECK(s.phase == 0.0);
      }
    }
  }

  SUBCASE("deterministic per seed, distinct across seeds") {
    CHECK(random_sea_state_model(spec, 99) == random_sea_state_model(spec, 99));
    std::set<double> first_omegas;
    for (std::uint64_t seed = 1000; seed < 1100; ++seed)
      first_omegas.insert(random_sea_state_model(spec, seed)[Channel::heave][0].omega);
    CHECK(first_omegas.size() == 100);
  }

  SUBCASE("relative weights keep components away from zero") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const WaveModel m = random_sea_state_model(spec, seed);
      for (Channel c : kChannels) {
        const double sum = m.amplitude_sum(c);
        // weights in (0.5, 1.5) over 4 terms: each share lies in (0.1, 0.5)
        for (const auto& s : m[c]) {
          CHECK(s.amplitude / sum > 0.1);
          CHECK(s.amplitude / sum < 0.5);
        }
      }
    }
  }

  SUBCASE("random phases option") {
    const WaveModel m = random_sea_state_model(spec, 5, true);
    bool any_nonzero = false;
    for (const auto& ch : m.channels)
      for (const auto& s : ch) {
        CHECK(s.phase >= 0.0);
        CHECK(s.phase < 2.0 * std::numbers::pi);
        any_nonzero = any_nonzero || s.phase != 0.0;
      }
    CHECK(any_nonzero);
    CHECK(oracle::count_violations(m, spec) == 0);
  }

  SUBCASE("inverted ranges rejected") {
    SeaStateSpec bad = spec;
    bad[Channel::pitch].period = {8.0, 5.0};
    CHECK_THROWS_AS(random_sea_state_model(bad, 1), InvalidModel);
    bad = spec;
    bad[Channel::heave].amplitude_sum = {0.0, 1.0};
    CHECK_THROWS_AS(random_sea_state_model(bad, 1), InvalidModel);
  }
}

TEST_CASE("wave model json") {
  const WaveModel m = random_sea_state_model(sea_state5_spec(), 17, true);
  const WaveModel back = wave_model_from_json(nlohmann::json::parse(to_json(m).dump()));
  CHECK(back == m);

  const auto doc = to_json(knox_training_model());
  CHECK(doc["label"] == "knox");
  CHECK(doc["channels"]["heave"][0]["amplitude"] == 0.2172);
  CHECK(doc["channels"]["pitch"][3]["omega"] == 0.82);

  nlohmann::json bad = doc;
  bad["channels"]["roll"] = nlohmann::json::array();
  CHECK_THROWS_AS(wave_model_from_json(bad), InvalidModel);
  bad = doc;
  bad["channels"]["roll"][0]["amplitude"] = -1.0;
  CHECK_THROWS_AS(wave_model_from_json(bad), InvalidModel);
  CHECK_THROWS_AS(wave_model_from_json(nlohmann::json::object()), InvalidModel);
}

TEST_CASE("sea state spec json") {
  const SeaStateSpec s = sea_state5_spec();
  CHECK(sea_state_spec_from_json(to_json(s)) == s);
  auto doc = to_json(s);
  doc["roll"]["period_range"] = {13.0, 8.0};
  CHECK_THROWS_AS(sea_state_spec_from_json(doc), InvalidModel);
}
