#include <cmath>
#include <set>

#include "doctest.h"
#include "deckmotion/rng.hpp"
#include "deckmotion/series.hpp"

using namespace deckmotion;

namespace {

MotionSeries ramp(std::size_t n) {
  MotionSeries s;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = static_cast<double>(i);
    s.samples.push_back({v, 100.0 + v, -v});
  }
  return s;
}

}  // namespace

TEST_CASE("sample_series") {
  const WaveModel knox = knox_training_model();
  CHECK(sample_series(knox, 2000, 0.1).size() == 2000);

  const MotionSeries one = sample_series(sea_state5_reference_model(), 1, 0.1);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == Motion{0.0, 0.0, 0.0});

  const MotionSeries three = sample_series(knox, 3, 0.5);
  CHECK(three[2] == evaluate_model(knox, 1.0));
  CHECK(three[2][0] == doctest::Approx(0.656869718238790679).epsilon(1e-14));

  CHECK_THROWS_AS(sample_series(knox, 0, 0.1), InvalidSeries);
  CHECK_THROWS_AS(sample_series(knox, 10, 0.0), InvalidSeries);
  CHECK_THROWS_AS(sample_series(knox, 10, -0.1), InvalidSeries);
}

TEST_CASE("make_windows") {
  CHECK(make_windows(ramp(2000), 40).size() == 1960);

  const WindowedDataset one = make_windows(ramp(41), 40);
  REQUIRE(one.size() == 1);
  CHECK(one.target_indices[0] == 40);

  // Hand-built index table for n = 50, L = 40, window 0: rows are samples
  // 0..39, target is sample 40.
  const MotionSeries s = ramp(50);
  const WindowedDataset ds = make_windows(s, 40);
  CHECK(ds.size() == 10);
  const auto w0 = ds.window(0);
  for (std::size_t r = 0; r < 40; ++r) {
    CHECK(w0[r * 3 + 0] == static_cast<double>(r));
    CHECK(w0[r * 3 + 1] == 100.0 + static_cast<double>(r));
    CHECK(w0[r * 3 + 2] == -static_cast<double>(r));
  }
  CHECK(ds.targets[0] == s[40]);

  CHECK_THROWS_AS(make_windows(ramp(40), 40), InvalidSeries);
  CHECK_THROWS_AS(make_windows(ramp(10), 0), InvalidSeries);
}

TEST_CASE("window reconstruction property") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.below(200);
    const std::size_t lookback = 1 + rng.below(n - 1);
    MotionSeries s;
    for (std::size_t i = 0; i < n; ++i)
      s.samples.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const WindowedDataset ds = make_windows(s, lookback);
    REQUIRE(ds.size() == n - lookback);
    for (std::size_t k = 0; k < ds.size(); ++k) {
      const std::size_t j = ds.target_indices[k];
      const auto w = ds.window(k);
      for (std::size_t r = 0; r < lookback; ++r)
        for (int c = 0; c < 3; ++c) CHECK(w[r * 3 + c] == s[j - lookback + r][c]);
      CHECK(ds.targets[k] == s[j]);
      // last row + target = two consecutive samples
      const Motion last{w[(lookback - 1) * 3], w[(lookback - 1) * 3 + 1], w[(lookback - 1) * 3 + 2]};
      CHECK(last == s[j - 1]);
    }
  }
}

TEST_CASE("split_series") {
  const WindowedDataset ds = make_windows(ramp(2000), 40);
  const SplitDataset sp = split_series(ds, 0.7, 2000);
  CHECK(sp.boundary_index == 1400);
  CHECK(sp.test.size() == 600);
  CHECK(sp.train.size() == 1360);
  CHECK(sp.test.target_indices.front() == 1400);

  // Enumerate target indices 40..1399 independently.
  std::vector<std::size_t> expected;
  for (std::size_t j = 40; j < 1400; ++j) expected.push_back(j);
  CHECK(sp.train.target_indices == expected);

  std::set<std::size_t> all(sp.train.target_indices.begin(), sp.train.target_indices.end());
  for (std::size_t j : sp.test.target_indices) CHECK(all.insert(j).second);
  CHECK(all.size() == ds.size());
  for (std::size_t j : sp.train.target_indices) CHECK(j < sp.boundary_index);
  for (std::size_t j : sp.test.target_indices) CHECK(j >= sp.boundary_index);

  // First test window consumes the final training samples as history.
  CHECK(sp.test.window(0)[0] == 1360.0);

  CHECK_THROWS_AS(split_series(ds, 0.01, 2000), InvalidSeries);
  CHECK_THROWS_AS(split_series(ds, 0.9999, 2000), InvalidSeries);
  CHECK_THROWS_AS(split_series(ds, 0.0, 2000), InvalidSeries);
  CHECK_THROWS_AS(split_series(ds, 1.0, 2000), InvalidSeries);
}

TEST_CASE("normalizer") {
  MotionSeries zeros;
  zeros.samples.assign(10, Motion{0, 0, 0});
  const Normalizer nz = fit_normalizer(zeros, 10);
  CHECK(nz.offset == Motion{0, 0, 0});
  CHECK(nz.scale == Motion{1, 1, 1});

  MotionSeries pm;
  pm.samples = {{-1, -1, -1}, {1, 1, 1}};
  const Normalizer np = fit_normalizer(pm, 2);
  CHECK(np.offset == Motion{0, 0, 0});
  CHECK(np.scale == Motion{1, 1, 1});

  CHECK_THROWS_AS(fit_normalizer(pm, 1), InvalidSeries);

  const MotionSeries knox = sample_series(knox_training_model(), 2000, 0.1);
  CHECK(apply_normalizer(Normalizer::identity(), knox) == knox);

  const Normalizer n = fit_normalizer(knox, 1400);
  const MotionSeries z = apply_normalizer(n, knox);
  const MotionSeries back = invert_normalizer(n, z);
  for (std::size_t i = 0; i < knox.size(); ++i)
    for (int c = 0; c < 3; ++c) CHECK(std::abs(back[i][c] - knox[i][c]) <= 1e-12);

  // Recomputed statistics on the normalized training segment.
  for (int c = 0; c < 3; ++c) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < 1400; ++i) mean += z[i][c];
    mean /= 1400.0;
    for (std::size_t i = 0; i < 1400; ++i) sq += (z[i][c] - mean) * (z[i][c] - mean);
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(std::sqrt(sq / 1400.0) - 1.0) < 1e-9);
  }
}

TEST_CASE("normalizer round trip property") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    MotionSeries s;
    const std::size_t n = 2 + rng.below(50);
    for (std::size_t i = 0; i < n; ++i)
      s.samples.push_back({rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3)});
    const Normalizer norm = fit_normalizer(s, n);
    const MotionSeries back = invert_normalizer(norm, apply_normalizer(norm, s));
    for (std::size_t i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c) CHECK(std::abs(back[i][c] - s[i][c]) <= 1e-12 * 1e3);
  }
}

TEST_CASE("series csv") {
  const MotionSeries s = sample_series(random_sea_state_model(sea_state5_spec(), 4), 300, 0.1);
  const std::string text = series_to_csv(s);
  CHECK(text.rfind("t,heave,pitch,roll\n", 0) == 0);
  const MotionSeries back = series_from_csv(text);
  CHECK(back.samples == s.samples);
  CHECK(back.dt == s.dt);
  CHECK(back.t0 == 0.0);
  CHECK(series_to_csv(back) == text);

  CHECK(series_from_csv("t,heave,pitch,roll\n0,1,2,3\n", 0.25).dt == 0.25);
  CHECK(series_from_csv("t,heave,pitch,roll\r\n0,1,2,3\r\n0.5,1,2,3\r\n").dt == 0.5);
  CHECK_THROWS_AS(series_from_csv(""), InvalidSeries);
  CHECK_THROWS_AS(series_from_csv("t,heave,pitch,roll\n"), InvalidSeries);
  CHECK_THROWS_AS(series_from_csv("a,b,c,d\n0,1,2,3\n"), InvalidSeries);
  CHECK_THROWS_AS(series_from_csv("t,heave,pitch,roll\n0,1,2\n"), InvalidSeries);
  CHECK_THROWS_AS(series_from_csv("t,heave,pitch,roll\n0,1,x,3\n"), InvalidSeries);
  CHECK_THROWS_AS(series_from_csv("t,heave,pitch,roll\n0,1,2,3\n0.1,1,2,3\n0.5,1,2,3\n"),
                  InvalidSeries);
}

TEST_CASE("format_double round trips") {
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(-1.0, 1.0) * std::pow(10.0, rng.uniform(-20, 20));
    CHECK(std::stod(format_double(x)) == x);
  }
}
