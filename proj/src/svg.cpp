#include "deckmotion/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace deckmotion {

namespace {

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  std::string s(buf);
  if (s == "-0.00" || s == "-0") s.erase(0, 1);
  return s;
}

std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

// 1-2-5 tick step giving roughly `target` intervals over [lo, hi].
double tick_step(double lo, double hi, int target) {
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double nice = norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0;
  return nice * mag;
}

struct Extent {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      const double pad = std::max(1e-3, std::abs(hi) * 0.1);
      lo -= pad;
      hi += pad;
    }
  }
};

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};

}  // namespace

std::string render_line_plot(const PlotSpec& spec) {
  const double left = 70, right = 20, top = 36, bottom = 48;
  const double pw = spec.width - left - right;
  const double ph = spec.height - top - bottom;

  Extent xe, ye;
  for (const auto& line : spec.lines) {
    for (double v : line.x) xe.add(v);
    for (double v : line.y) ye.add(v);
  }
  xe.finish();
  ye.finish();
  const double ypad = 0.05 * (ye.hi - ye.lo);
  ye.lo -= ypad;
  ye.hi += ypad;

  auto sx = [&](double x) { return left + (x - xe.lo) / (xe.hi - xe.lo) * pw; };
  auto sy = [&](double y) { return top + (ye.hi - y) / (ye.hi - ye.lo) * ph; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) +
       "\" height=\"" + std::to_string(spec.height) + "\" viewBox=\"0 0 " +
       std::to_string(spec.width) + " " + std::to_string(spec.height) +
       "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fixed(spec.width / 2.0) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
       escape(spec.title) + "</text>\n";

  // grid and ticks
  const double xs = tick_step(xe.lo, xe.hi, 8);
  for (double v = std::ceil(xe.lo / xs) * xs; v <= xe.hi + 1e-9 * xs; v += xs) {
    const std::string px = fixed(sx(v));
    s += "<line x1=\"" + px + "\" y1=\"" + fixed(top) + "\" x2=\"" + px + "\" y2=\"" +
         fixed(top + ph) + "\" stroke=\"#e0e0e0\"/>\n";
    s += "<text x=\"" + px + "\" y=\"" + fixed(top + ph + 16) + "\" text-anchor=\"middle\">" +
         tick_label(v) + "</text>\n";
  }
  const double ys = tick_step(ye.lo, ye.hi, 6);
  for (double v = std::ceil(ye.lo / ys) * ys; v <= ye.hi + 1e-9 * ys; v += ys) {
    const std::string py = fixed(sy(v));
    s += "<line x1=\"" + fixed(left) + "\" y1=\"" + py + "\" x2=\"" + fixed(left + pw) +
         "\" y2=\"" + py + "\" stroke=\"#e0e0e0\"/>\n";
    s += "<text x=\"" + fixed(left - 6) + "\" y=\"" + fixed(sy(v) + 4) +
         "\" text-anchor=\"end\">" + tick_label(v) + "</text>\n";
  }
  s += "<rect x=\"" + fixed(left) + "\" y=\"" + fixed(top) + "\" width=\"" + fixed(pw) +
       "\" height=\"" + fixed(ph) + "\" fill=\"none\" stroke=\"#333\"/>\n";
  s += "<text x=\"" + fixed(left + pw / 2) + "\" y=\"" + fixed(spec.height - 10.0) +
       "\" text-anchor=\"middle\">" + escape(spec.x_label) + "</text>\n";
  s += "<text transform=\"translate(16," + fixed(top + ph / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">" + escape(spec.y_label) + "</text>\n";

  for (std::size_t li = 0; li < spec.lines.size(); ++li) {
    const PlotLine& line = spec.lines[li];
    const std::string color =
        line.color.empty() ? kPalette[li % std::size(kPalette)] : line.color;
    s += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.2\" points=\"";
    const std::size_t n = std::min(line.x.size(), line.y.size());
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(line.x[k]) || !std::isfinite(line.y[k])) continue;
      if (k) s += ' ';
      s += fixed(sx(line.x[k])) + ',' + fixed(sy(line.y[k]));
    }
    s += "\"/>\n";
    const double ly = top + 14 + 14.0 * static_cast<double>(li);
    s += "<line x1=\"" + fixed(left + pw - 120) + "\" y1=\"" + fixed(ly - 4) + "\" x2=\"" +
         fixed(left + pw - 100) + "\" y2=\"" + fixed(ly - 4) + "\" stroke=\"" + color +
         "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fixed(left + pw - 95) + "\" y=\"" + fixed(ly) + "\">" +
         escape(line.label) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::vector<NamedSvg> series_plots(const MotionSeries& series) {
  std::vector<double> t(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) t[i] = series.time(i);
  std::vector<NamedSvg> out;
  for (Channel ch : kChannels) {
    const int c = static_cast<int>(ch);
    PlotSpec spec;
    spec.title = std::string("Deck motion: ") + channel_name(ch);
    spec.y_label = channel_name(ch);
    PlotLine line{channel_name(ch), "", t, {}};
    for (const auto& s : series.samples) line.y.push_back(s[c]);
    spec.lines.push_back(std::move(line));
    out.push_back({std::string("series_") + channel_name(ch) + ".svg", render_line_plot(spec)});
  }
  return out;
}

std::vector<NamedSvg> forecast_plots(const std::vector<double>& times,
                                     const ForecastResult& result, const ErrorReport& report) {
  if (times.size() != result.size()) throw std::invalid_argument("time axis length mismatch");
  std::vector<NamedSvg> out;
  for (Channel ch : kChannels) {
    const int c = static_cast<int>(ch);
    const std::string name = channel_name(ch);

    PlotSpec cmp;
    cmp.title = "One-step-ahead prediction: " + name;
    cmp.y_label = name;
    PlotLine truth{"original", "#1f77b4", times, {}};
    PlotLine pred{"predicted", "#d62728", times, {}};
    for (std::size_t k = 0; k < result.size(); ++k) {
      truth.y.push_back(result.truths[k][c]);
      pred.y.push_back(result.predictions[k][c]);
    }
    cmp.lines = {std::move(truth), std::move(pred)};
    out.push_back({"truth_vs_prediction_" + name + ".svg", render_line_plot(cmp)});

    PlotSpec err;
    err.title = "Absolute error: " + name;
    err.y_label = "|error| " + name;
    err.lines.push_back({"abs error", "#2ca02c", times, report.channels[c].curve});
    out.push_back({"abs_error_" + name + ".svg", render_line_plot(err)});
  }
  return out;
}

ForecastTable forecast_from_errors_csv(const std::string& text) {
  ForecastTable table;
  std::size_t pos = 0, line_no = 0;
  bool header = false;
  int expected_channel = 0;
  auto number = [&](std::string_view f) {
    double v = 0.0;
    const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (res.ec != std::errc{} || res.ptr != f.data() + f.size())
      throw InvalidSeries("error CSV line " + std::to_string(line_no) + ": bad number");
    return v;
  };
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header) {
      if (line != "t,channel,truth,prediction,abs_error")
        throw InvalidSeries("expected header 't,channel,truth,prediction,abs_error'");
      header = true;
      continue;
    }
    std::vector<std::string_view> f;
    for (std::size_t start = 0;;) {
      const auto comma = line.find(',', start);
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (f.size() != 5) throw InvalidSeries("error CSV line " + std::to_string(line_no) + ": need 5 fields");
    if (f[1] != channel_name(kChannels[expected_channel]))
      throw InvalidSeries("error CSV line " + std::to_string(line_no) + ": unexpected channel");
    const double t = number(f[0]);
    if (expected_channel == 0) {
      table.times.push_back(t);
      table.result.target_indices.push_back(table.result.target_indices.size());
      table.result.truths.push_back({});
      table.result.predictions.push_back({});
    }
    table.result.truths.back()[expected_channel] = number(f[2]);
    table.result.predictions.back()[expected_channel] = number(f[3]);
    expected_channel = (expected_channel + 1) % 3;
  }
  if (!header || table.times.empty()) throw InvalidSeries("error CSV has no rows");
  if (expected_channel != 0) throw InvalidSeries("error CSV ends mid-record");
  return table;
}

}  // namespace deckmotion
