#pragma once

#include <optional>
#include <string>
#include <vector>

namespace initlab {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    /// When set, a star is drawn on the curve at this x position.
    std::optional<double> marker_x;
};

struct PlotOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 960;
    int height = 540;
};

/// Renders an overlay line chart as a self-contained SVG document: axes with
/// ticks, one colored polyline per series, a legend, and optional star
/// markers.  Axis ranges are chosen to contain every data point.
std::string render_line_svg(const std::vector<PlotSeries>& series,
                            const PlotOptions& options);

}  // namespace initlab
