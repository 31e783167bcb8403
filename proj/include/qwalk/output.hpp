#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "qwalk/evolution.hpp"
#include "qwalk/scattering.hpp"

namespace qwalk {

inline constexpr std::string_view kVersion = "0.1.0";

// "# qwalk-trees v<version>"
std::string csv_version_line();

// E, theta, ReT, ImT, absT, ReR, ImR, unitarity_residual, pole_flag
void write_transmission_csv(std::ostream& os, const std::vector<ScatteringResult>& rows);

// t, prob_target, norm_residual
void write_probe_csv(std::ostream& os, const PenetrabilityReport& rep);

// Energy-grid specs "log:a:b:N" (geometric, a > 0) and "lin:a:b:N".
std::vector<double> parse_grid(std::string_view spec);

struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;  // NaN breaks the line
  std::string label;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  // Fixed y range; when y_min >= y_max the data range is used.
  double y_min = 0.0;
  double y_max = 0.0;
  int width = 720;
  int height = 440;
};

// Self-contained SVG line plot with axes and tick labels.
std::string svg_plot(const std::vector<PlotSeries>& series, const PlotOptions& opt);

}  // namespace qwalk
