#include "deckmotion/series.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace deckmotion {

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

WindowedDataset WindowedDataset::subset(std::span<const std::size_t> which) const {
  WindowedDataset out;
  out.lookback = lookback;
  out.inputs.reserve(which.size() * lookback * 3);
  out.targets.reserve(which.size());
  out.target_indices.reserve(which.size());
  for (std::size_t k : which) {
    const auto w = window(k);
    out.inputs.insert(out.inputs.end(), w.begin(), w.end());
    out.targets.push_back(targets[k]);
    out.target_indices.push_back(target_indices[k]);
  }
  return out;
}

Motion Normalizer::apply(const Motion& x) const {
  Motion z;
  for (int c = 0; c < 3; ++c) z[c] = (x[c] - offset[c]) / scale[c];
  return z;
}

Motion Normalizer::invert(const Motion& z) const {
  Motion x;
  for (int c = 0; c < 3; ++c) x[c] = z[c] * scale[c] + offset[c];
  return x;
}

MotionSeries sample_series(const WaveModel& model, std::size_t n, double dt, double t0) {
  if (n == 0) throw InvalidSeries("sample count must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidSeries("dt must be positive");
  MotionSeries s;
  s.dt = dt;
  s.t0 = t0;
  s.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) s.samples.push_back(evaluate_model(model, s.time(i)));
  return s;
}

WindowedDataset make_windows(const MotionSeries& series, std::size_t lookback) {
  if (lookback == 0) throw InvalidSeries("lookback must be positive");
  if (series.size() <= lookback)
    throw InvalidSeries("series of length " + std::to_string(series.size()) +
                        " is too short for lookback " + std::to_string(lookback));
  WindowedDataset ds;
  ds.lookback = lookback;
  const std::size_t count = series.size() - lookback;
  ds.inputs.reserve(count * lookback * 3);
  ds.targets.reserve(count);
  ds.target_indices.reserve(count);
  for (std::size_t j = lookback; j < series.size(); ++j) {
    for (std::size_t r = j - lookback; r < j; ++r)
      ds.inputs.insert(ds.inputs.end(), series[r].begin(), series[r].end());
    ds.targets.push_back(series[j]);
    ds.target_indices.push_back(j);
  }
  return ds;
}

SplitDataset split_series(const WindowedDataset& windows, double train_fraction,
                          std::size_t source_length) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidSeries("train fraction must lie in (0, 1)");
  if (windows.size() == 0) throw InvalidSeries("no windows to split");
  const auto boundary =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(source_length)));
  if (boundary <= windows.target_indices.front() || boundary > windows.target_indices.back())
    throw InvalidSeries("train fraction " + format_double(train_fraction) +
                        " leaves the train or test side empty");

  std::vector<std::size_t> train_ids, test_ids;
  for (std::size_t k = 0; k < windows.size(); ++k)
    (windows.target_indices[k] < boundary ? train_ids : test_ids).push_back(k);

  return {windows.subset(train_ids), windows.subset(test_ids), boundary};
}

Normalizer fit_normalizer(const MotionSeries& series, std::size_t fit_range_end) {
  if (fit_range_end < 2 || fit_range_end > series.size())
    throw InvalidSeries("normalizer fit range must cover at least 2 samples of the series");
  Normalizer norm;
  const double n = static_cast<double>(fit_range_end);
  for (int c = 0; c < 3; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < fit_range_end; ++i) mean += series[i][c];
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < fit_range_end; ++i) {
      const double d = series[i][c] - mean;
      var += d * d;
    }
    const double sd = std::sqrt(var / n);
    norm.offset[c] = mean;
    norm.scale[c] = sd > 0.0 ? sd : 1.0;
  }
  return norm;
}

MotionSeries apply_normalizer(const Normalizer& norm, const MotionSeries& series) {
  MotionSeries out = series;
  for (auto& s : out.samples) s = norm.apply(s);
  return out;
}

MotionSeries invert_normalizer(const Normalizer& norm, const MotionSeries& series) {
  MotionSeries out = series;
  for (auto& s : out.samples) s = norm.invert(s);
  return out;
}

std::string series_to_csv(const MotionSeries& series) {
  std::string out = "t,heave,pitch,roll\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out += format_double(series.time(i));
    for (double v : series[i]) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

namespace {

double parse_field(std::string_view field, std::size_t line_no) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
    field.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size() || !std::isfinite(v))
    throw InvalidSeries("line " + std::to_string(line_no) + ": bad number '" +
                        std::string(field) + "'");
  return v;
}

}  // namespace

MotionSeries series_from_csv(std::string_view text, double fallback_dt) {
  std::vector<double> times;
  MotionSeries series;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "t,heave,pitch,roll")
        throw InvalidSeries("expected header 't,heave,pitch,roll'");
      header_seen = true;
      continue;
    }
    std::array<double, 4> row{};
    std::size_t col = 0;
    while (true) {
      const auto comma = line.find(',');
      if (col >= 4) throw InvalidSeries("line " + std::to_string(line_no) + ": too many columns");
      row[col++] = parse_field(line.substr(0, comma), line_no);
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (col != 4) throw InvalidSeries("line " + std::to_string(line_no) + ": expected 4 columns");
    times.push_back(row[0]);
    series.samples.push_back({row[1], row[2], row[3]});
  }
  if (!header_seen) throw InvalidSeries("empty series file");
  if (series.samples.empty()) throw InvalidSeries("series file has no samples");

  series.t0 = times.front();
  series.dt = times.size() > 1 ? times[1] - times[0] : fallback_dt;
  if (!(series.dt > 0.0)) throw InvalidSeries("time column must be increasing");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - series.time(i)) > 1e-6 * series.dt)
      throw InvalidSeries("non-uniform sampling at row " + std::to_string(i + 1));
  }
  return series;
}

}  // namespace deckmotion
