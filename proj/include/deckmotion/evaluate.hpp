#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "deckmotion/series.hpp"
#include "deckmotion/train.hpp"
#include "json.hpp"

namespace deckmotion {

/// One-step-ahead predictions (physical units) aligned with the truths.
struct ForecastResult {
  std::vector<std::size_t> target_indices;
  std::vector<Motion> predictions;
  std::vector<Motion> truths;

  std::size_t size() const { return target_indices.size(); }
};

struct ChannelError {
  std::vector<double> curve;  ///< |prediction - truth| per target index
  double mae = 0.0;
  double max_error = 0.0;
};

struct ErrorReport {
  std::array<ChannelError, 3> channels;
  std::size_t count = 0;

  const ChannelError& operator[](Channel c) const { return channels[static_cast<int>(c)]; }
};

/// Predicts every index in [start_index, n) from the preceding lookback
/// observed samples. Predictions are never fed back. Indices are evaluated
/// in parallel; the result does not depend on the thread count.
ForecastResult predict_series(const ModelArtifact& artifact, const MotionSeries& series,
                              std::size_t start_index);

/// Same, with an explicit normalizer in place of the artifact's.
ForecastResult predict_series(const LstmParams& params, const Normalizer& normalizer,
                              const MotionSeries& series, std::size_t start_index);

/// Single-threaded reference for predict_series.
ForecastResult predict_series_serial(const LstmParams& params, const Normalizer& normalizer,
                                     const MotionSeries& series, std::size_t start_index);

ErrorReport error_report(const ForecastResult& result);

/// Long format: one row per (t, channel), header `t,channel,truth,prediction,abs_error`.
std::string errors_to_csv(const ForecastResult& result, const ErrorReport& report, double dt,
                          double t0 = 0.0);

/// {"heave"|"pitch"|"roll": {"mae", "max_error", "count"}}
nlohmann::json summary_json(const ErrorReport& report);

/// Predictions as a series sampled at the target times (t0 + start*dt).
MotionSeries predictions_as_series(const ForecastResult& result, double dt, double t0 = 0.0);

}  // namespace deckmotion
