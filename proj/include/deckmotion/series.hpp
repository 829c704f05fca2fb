#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "deckmotion/wavegen.hpp"

namespace deckmotion {

class InvalidSeries : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniformly sampled tri-channel motion; sample i is at t0 + i*dt.
struct MotionSeries {
  double dt = 0.1;
  double t0 = 0.0;
  std::vector<Motion> samples;

  std::size_t size() const { return samples.size(); }
  double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
  const Motion& operator[](std::size_t i) const { return samples[i]; }

  bool operator==(const MotionSeries&) const = default;
};

/// Sliding windows of `lookback` rows paired with the next sample.
/// Inputs are stored contiguously, row-major, lookback x 3 per window.
struct WindowedDataset {
  std::size_t lookback = 0;
  std::vector<double> inputs;
  std::vector<Motion> targets;
  std::vector<std::size_t> target_indices;

  std::size_t size() const { return targets.size(); }

  std::span<const double> window(std::size_t k) const {
    return std::span<const double>(inputs).subspan(k * lookback * 3, lookback * 3);
  }

  /// Copies the listed windows, in order, into a new dataset.
  WindowedDataset subset(std::span<const std::size_t> which) const;
};

struct SplitDataset {
  WindowedDataset train;
  WindowedDataset test;
  std::size_t boundary_index = 0;
};

/// Per-channel affine map x -> (x - offset) / scale.
struct Normalizer {
  Motion offset{0.0, 0.0, 0.0};
  Motion scale{1.0, 1.0, 1.0};

  static Normalizer identity() { return {}; }

  Motion apply(const Motion& x) const;
  Motion invert(const Motion& z) const;

  bool operator==(const Normalizer&) const = default;
};

MotionSeries sample_series(const WaveModel& model, std::size_t n, double dt, double t0 = 0.0);

WindowedDataset make_windows(const MotionSeries& series, std::size_t lookback);

/// Windows whose target index is below round(train_fraction * source_length)
/// go to train, the rest to test.
SplitDataset split_series(const WindowedDataset& windows, double train_fraction,
                          std::size_t source_length);

/// Mean / population standard deviation over samples [0, fit_range_end).
/// Constant channels get scale 1.
Normalizer fit_normalizer(const MotionSeries& series, std::size_t fit_range_end);

MotionSeries apply_normalizer(const Normalizer& norm, const MotionSeries& series);
MotionSeries invert_normalizer(const Normalizer& norm, const MotionSeries& series);

// CSV with header `t,heave,pitch,roll`; numbers in shortest round-trip form.
std::string series_to_csv(const MotionSeries& series);

/// Parses the CSV form. dt is inferred from the time column; a single-row
/// file takes `fallback_dt`.
MotionSeries series_from_csv(std::string_view text, double fallback_dt = 0.1);

/// Shortest decimal that parses back to exactly `x`.
std::string format_double(double x);

}  // namespace deckmotion
