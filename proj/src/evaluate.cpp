#include "deckmotion/evaluate.hpp"

#include <cmath>
#include <stdexcept>

namespace deckmotion {

namespace {

void check_request(const LstmParams& params, const MotionSeries& series, std::size_t start_index) {
  const auto lookback = static_cast<std::size_t>(params.config().lookback);
  if (series.size() < lookback + 1)
    throw InvalidSeries("series of length " + std::to_string(series.size()) +
                        " is shorter than lookback + 1");
  if (start_index < lookback || start_index >= series.size())
    throw InvalidSeries("start index " + std::to_string(start_index) + " must lie in [" +
                        std::to_string(lookback) + ", " + std::to_string(series.size()) + ")");
}

// Normalizes the observed window ending before `j` into `buf` and predicts j.
Motion predict_at(const LstmParams& params, const Normalizer& norm, const MotionSeries& series,
                  std::size_t j, std::vector<double>& buf) {
  const auto lookback = static_cast<std::size_t>(params.config().lookback);
  buf.resize(lookback * 3);
  for (std::size_t r = 0; r < lookback; ++r) {
    const Motion z = norm.apply(series[j - lookback + r]);
    for (int c = 0; c < 3; ++c) buf[r * 3 + c] = z[c];
  }
  return norm.invert(forward_window(params, buf));
}

ForecastResult allocate(const MotionSeries& series, std::size_t start_index) {
  ForecastResult r;
  const std::size_t count = series.size() - start_index;
  r.target_indices.resize(count);
  r.predictions.resize(count);
  r.truths.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    r.target_indices[k] = start_index + k;
    r.truths[k] = series[start_index + k];
  }
  return r;
}

}  // namespace

ForecastResult predict_series(const ModelArtifact& artifact, const MotionSeries& series,
                              std::size_t start_index) {
  return predict_series(artifact.params, artifact.normalizer, series, start_index);
}

ForecastResult predict_series(const LstmParams& params, const Normalizer& normalizer,
                              const MotionSeries& series, std::size_t start_index) {
  check_request(params, series, start_index);
  ForecastResult r = allocate(series, start_index);
  const auto count = static_cast<std::ptrdiff_t>(r.size());
#pragma omp parallel
  {
    std::vector<double> buf;
#pragma omp for schedule(static)
    for (std::ptrdiff_t k = 0; k < count; ++k)
      r.predictions[k] = predict_at(params, normalizer, series, r.target_indices[k], buf);
  }
  return r;
}

ForecastResult predict_series_serial(const LstmParams& params, const Normalizer& normalizer,
                                     const MotionSeries& series, std::size_t start_index) {
  check_request(params, series, start_index);
  ForecastResult r = allocate(series, start_index);
  std::vector<double> buf;
  for (std::size_t k = 0; k < r.size(); ++k)
    r.predictions[k] = predict_at(params, normalizer, series, r.target_indices[k], buf);
  return r;
}

ErrorReport error_report(const ForecastResult& result) {
  if (result.size() == 0) throw std::invalid_argument("empty forecast result");
  if (result.predictions.size() != result.size() || result.truths.size() != result.size())
    throw std::invalid_argument("forecast result has mismatched lengths");
  ErrorReport rep;
  rep.count = result.size();
  for (int c = 0; c < 3; ++c) {
    ChannelError& ce = rep.channels[c];
    ce.curve.resize(result.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < result.size(); ++k) {
      const double e = std::abs(result.predictions[k][c] - result.truths[k][c]);
      ce.curve[k] = e;
      sum += e;
      ce.max_error = std::max(ce.max_error, e);
    }
    ce.mae = sum / static_cast<double>(result.size());
  }
  return rep;
}

std::string errors_to_csv(const ForecastResult& result, const ErrorReport& report, double dt,
                          double t0) {
  std::string out = "t,channel,truth,prediction,abs_error\n";
  for (std::size_t k = 0; k < result.size(); ++k) {
    const std::string t = format_double(t0 + static_cast<double>(result.target_indices[k]) * dt);
    for (Channel ch : kChannels) {
      const int c = static_cast<int>(ch);
      out += t;
      out += ',';
      out += channel_name(ch);
      out += ',';
      out += format_double(result.truths[k][c]);
      out += ',';
      out += format_double(result.predictions[k][c]);
      out += ',';
      out += format_double(report.channels[c].curve[k]);
      out += '\n';
    }
  }
  return out;
}

nlohmann::json summary_json(const ErrorReport& report) {
  nlohmann::json doc = nlohmann::json::object();
  for (Channel ch : kChannels) {
    const auto& ce = report[ch];
    doc[channel_name(ch)] = {{"mae", ce.mae}, {"max_error", ce.max_error}, {"count", report.count}};
  }
  return doc;
}

MotionSeries predictions_as_series(const ForecastResult& result, double dt, double t0) {
  if (result.size() == 0) throw std::invalid_argument("empty forecast result");
  for (std::size_t k = 1; k < result.size(); ++k)
    if (result.target_indices[k] != result.target_indices[k - 1] + 1)
      throw std::invalid_argument("forecast indices are not contiguous");
  MotionSeries s;
  s.dt = dt;
  s.t0 = t0 + static_cast<double>(result.target_indices.front()) * dt;
  s.samples = result.predictions;
  return s;
}

}  // namespace deckmotion
