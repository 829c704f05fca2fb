#pragma once

#include <string>
#include <vector>

#include "deckmotion/evaluate.hpp"
#include "deckmotion/series.hpp"

namespace deckmotion {

struct PlotLine {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label = "t [s]";
  std::string y_label;
  int width = 960;
  int height = 360;
  std::vector<PlotLine> lines;
};

/// Self-contained SVG line chart with axes, ticks and a legend. Output is a
/// pure function of the spec.
std::string render_line_plot(const PlotSpec& spec);

struct NamedSvg {
  std::string file_name;
  std::string svg;
};

/// One chart per channel: series_<channel>.svg.
std::vector<NamedSvg> series_plots(const MotionSeries& series);

/// Per channel: truth_vs_prediction_<channel>.svg and abs_error_<channel>.svg.
std::vector<NamedSvg> forecast_plots(const std::vector<double>& times,
                                     const ForecastResult& result, const ErrorReport& report);

/// Forecast rows read back from the error CSV; target indices are the row
/// positions.
struct ForecastTable {
  std::vector<double> times;
  ForecastResult result;
};

ForecastTable forecast_from_errors_csv(const std::string& text);

}  // namespace deckmotion
