#pragma once

#include <string>
#include <vector>

namespace lqts {

enum class PlotKind { kStabilization, kRegret, kEstimation };

PlotKind parse_plot_kind(const std::string& text);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Figure {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// Builds the figure for a CSV written by the experiment harness. Throws
/// ValidationError when the header does not match the kind or there are no
/// data rows.
Figure figure_from_csv(const std::string& csv_text, PlotKind kind);

std::string render_svg(const Figure& figure);

/// Reads csv_path and writes the SVG to out_path. Nothing is written when
/// validation fails.
void emit_plot(const std::string& csv_path, PlotKind kind, const std::string& out_path);

}  // namespace lqts
