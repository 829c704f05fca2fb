#include "deckmotion/restperiod.hpp"

#include <cmath>
#include <stdexcept>

namespace deckmotion {

void RestCriteria::validate() const {
  if (!(pitch_max > 0.0) || !(roll_max > 0.0))
    throw std::invalid_argument("pitch and roll thresholds must be positive");
  if (heave_rate_max && !(*heave_rate_max > 0.0))
    throw std::invalid_argument("heave rate threshold must be positive");
  if (!(min_duration >= 0.0) || !std::isfinite(min_duration))
    throw std::invalid_argument("minimum duration must be non-negative");
}

std::vector<bool> calm_mask(const MotionSeries& series, const RestCriteria& criteria) {
  criteria.validate();
  const std::size_t n = series.size();
  std::vector<bool> calm(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Motion& s = series[i];
    bool ok = std::abs(s[1]) <= criteria.pitch_max && std::abs(s[2]) <= criteria.roll_max;
    if (ok && criteria.heave_rate_max && n > 1) {
      double rate;
      if (i == 0)
        rate = (series[1][0] - series[0][0]) / series.dt;
      else if (i == n - 1)
        rate = (series[n - 1][0] - series[n - 2][0]) / series.dt;
      else
        rate = (series[i + 1][0] - series[i - 1][0]) / (2.0 * series.dt);
      ok = std::abs(rate) <= *criteria.heave_rate_max;
    }
    calm[i] = ok;
  }
  return calm;
}

namespace {

std::vector<RestInterval> runs(const std::vector<bool>& calm, double dt, std::size_t first_index,
                               double t0, double min_duration) {
  std::vector<RestInterval> out;
  const std::size_t n = calm.size();
  std::size_t i = 0;
  while (i < n) {
    if (!calm[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && calm[j + 1]) ++j;
    RestInterval r;
    r.start_index = first_index + i;
    r.end_index = first_index + j;
    r.start_time = t0 + static_cast<double>(r.start_index) * dt;
    r.end_time = t0 + static_cast<double>(r.end_index) * dt;
    r.duration = static_cast<double>(j - i) * dt;
    if (r.duration >= min_duration) out.push_back(r);
    i = j + 1;
  }
  return out;
}

}  // namespace

std::vector<RestInterval> detect_rest_periods(const MotionSeries& series,
                                              const RestCriteria& criteria) {
  if (series.size() == 0) throw std::invalid_argument("empty series");
  return runs(calm_mask(series, criteria), series.dt, 0, series.t0, criteria.min_duration);
}

std::vector<RestInterval> rest_periods_from_forecast(const ForecastResult& result, double dt,
                                                     const RestCriteria& criteria, double t0) {
  const MotionSeries predicted = predictions_as_series(result, dt, t0);
  return runs(calm_mask(predicted, criteria), dt, result.target_indices.front(), t0,
              criteria.min_duration);
}

std::string intervals_to_csv(const std::vector<RestInterval>& intervals) {
  std::string out = "start_t,end_t,duration\n";
  for (const auto& r : intervals) {
    out += format_double(r.start_time) + ',' + format_double(r.end_time) + ',' +
           format_double(r.duration) + '\n';
  }
  return out;
}

nlohmann::json intervals_to_json(const std::vector<RestInterval>& intervals,
                                 const RestCriteria& criteria) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& r : intervals) {
    list.push_back({{"start_index", r.start_index},
                    {"end_index", r.end_index},
                    {"start_t", r.start_time},
                    {"end_t", r.end_time},
                    {"duration", r.duration}});
  }
  nlohmann::json crit = {{"pitch_max", criteria.pitch_max},
                         {"roll_max", criteria.roll_max},
                         {"min_duration", criteria.min_duration}};
  crit["heave_rate_max"] =
      criteria.heave_rate_max ? nlohmann::json(*criteria.heave_rate_max) : nlohmann::json(nullptr);
  return {{"criteria", std::move(crit)}, {"intervals", std::move(list)}};
}

}  // namespace deckmotion
