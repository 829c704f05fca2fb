#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "deckmotion/evaluate.hpp"
#include "deckmotion/series.hpp"
#include "json.hpp"

namespace deckmotion {

/// Landing-safe thresholds. A sample is calm when |pitch| <= pitch_max,
/// |roll| <= roll_max and, if set, |d heave / dt| <= heave_rate_max.
struct RestCriteria {
  double pitch_max = 0.5;
  double roll_max = 3.0;
  std::optional<double> heave_rate_max;
  double min_duration = 0.0;  ///< seconds

  void validate() const;
};

/// Maximal calm run, inclusive indices. duration = (end - start) * dt.
struct RestInterval {
  std::size_t start_index = 0;
  std::size_t end_index = 0;
  double start_time = 0.0;
  double end_time = 0.0;
  double duration = 0.0;

  bool operator==(const RestInterval&) const = default;
};

/// Per-sample calm flags; heave rate uses central differences inside the
/// series and one-sided differences at its ends.
std::vector<bool> calm_mask(const MotionSeries& series, const RestCriteria& criteria);

std::vector<RestInterval> detect_rest_periods(const MotionSeries& series,
                                              const RestCriteria& criteria);

/// Applies the same rule to the predicted channels. Indices in the result
/// are the forecast's target indices; times are t0 + index * dt.
std::vector<RestInterval> rest_periods_from_forecast(const ForecastResult& result, double dt,
                                                     const RestCriteria& criteria,
                                                     double t0 = 0.0);

/// Header `start_t,end_t,duration`.
std::string intervals_to_csv(const std::vector<RestInterval>& intervals);
nlohmann::json intervals_to_json(const std::vector<RestInterval>& intervals,
                                 const RestCriteria& criteria);

}  // namespace deckmotion
