#include "initlab/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace initlab {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

/// Linearly interpolates y on a series at x (clamped to the series range).
double y_at(const PlotSeries& s, double x) {
    if (s.x.empty()) return 0.0;
    if (x <= s.x.front()) return s.y.front();
    if (x >= s.x.back()) return s.y.back();
    for (std::size_t m = 1; m < s.x.size(); ++m) {
        if (s.x[m] >= x) {
            const double span = s.x[m] - s.x[m - 1];
            if (span <= 0.0) return s.y[m];
            const double w = (x - s.x[m - 1]) / span;
            return (1.0 - w) * s.y[m - 1] + w * s.y[m];
        }
    }
    return s.y.back();
}

std::string star_path(double cx, double cy, double r_outer, double r_inner) {
    std::string d;
    for (int p = 0; p < 10; ++p) {
        const double r = (p % 2 == 0) ? r_outer : r_inner;
        const double ang = -1.5707963267948966 + p * 0.6283185307179586;
        const double x = cx + r * std::cos(ang);
        const double y = cy + r * std::sin(ang);
        d += (p == 0 ? "M" : "L");
        d += num(x) + " " + num(y);
    }
    d += "Z";
    return d;
}

}  // namespace

std::string render_line_svg(const std::vector<PlotSeries>& series,
                            const PlotOptions& options) {
    const double w = options.width;
    const double h = options.height;
    const double ml = 70.0, mr = 160.0, mt = 40.0, mb = 55.0;
    const double pw = w - ml - mr;   // plot width
    const double ph = h - mt - mb;   // plot height

    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const PlotSeries& s : series) {
        for (std::size_t m = 0; m < s.x.size() && m < s.y.size(); ++m) {
            if (!std::isfinite(s.x[m]) || !std::isfinite(s.y[m])) continue;
            xmin = std::min(xmin, s.x[m]);
            xmax = std::max(xmax, s.x[m]);
            ymin = std::min(ymin, s.y[m]);
            ymax = std::max(ymax, s.y[m]);
        }
    }
    if (!std::isfinite(xmin)) {
        xmin = 0.0;
        xmax = 1.0;
        ymin = 0.0;
        ymax = 1.0;
    }
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= ymin) {
        ymax = ymin + 1.0;
        ymin -= 1.0;
    }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    const auto px = [&](double x) {
        return ml + (x - xmin) / (xmax - xmin) * pw;
    };
    const auto py = [&](double y) {
        return mt + (ymax - y) / (ymax - ymin) * ph;
    };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) +
           "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " +
           num(h) + "\">\n";
    svg += "<rect width=\"" + num(w) + "\" height=\"" + num(h) +
           "\" fill=\"white\"/>\n";
    svg += "<text x=\"" + num(ml + pw / 2) + "\" y=\"24\" font-family=\"sans-serif\" "
           "font-size=\"16\" text-anchor=\"middle\">" +
           escape_xml(options.title) + "</text>\n";

    // Axes box and ticks.
    svg += "<rect x=\"" + num(ml) + "\" y=\"" + num(mt) + "\" width=\"" +
           num(pw) + "\" height=\"" + num(ph) +
           "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int tick = 0; tick <= 5; ++tick) {
        const double fx = xmin + (xmax - xmin) * tick / 5.0;
        const double gx = px(fx);
        svg += "<line x1=\"" + num(gx) + "\" y1=\"" + num(mt + ph) +
               "\" x2=\"" + num(gx) + "\" y2=\"" + num(mt + ph + 5) +
               "\" stroke=\"#333\"/>\n";
        svg += "<text x=\"" + num(gx) + "\" y=\"" + num(mt + ph + 20) +
               "\" font-family=\"sans-serif\" font-size=\"11\" "
               "text-anchor=\"middle\">" + num(fx) + "</text>\n";
        const double fy = ymin + (ymax - ymin) * tick / 5.0;
        const double gy = py(fy);
        svg += "<line x1=\"" + num(ml - 5) + "\" y1=\"" + num(gy) +
               "\" x2=\"" + num(ml) + "\" y2=\"" + num(gy) +
               "\" stroke=\"#333\"/>\n";
        svg += "<text x=\"" + num(ml - 8) + "\" y=\"" + num(gy + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\" "
               "text-anchor=\"end\">" + num(fy) + "</text>\n";
    }
    svg += "<text x=\"" + num(ml + pw / 2) + "\" y=\"" + num(h - 12) +
           "\" font-family=\"sans-serif\" font-size=\"13\" "
           "text-anchor=\"middle\">" + escape_xml(options.x_label) +
           "</text>\n";
    svg += "<text x=\"18\" y=\"" + num(mt + ph / 2) +
           "\" font-family=\"sans-serif\" font-size=\"13\" "
           "text-anchor=\"middle\" transform=\"rotate(-90 18 " +
           num(mt + ph / 2) + ")\">" + escape_xml(options.y_label) +
           "</text>\n";

    // Curves.
    for (std::size_t sidx = 0; sidx < series.size(); ++sidx) {
        const PlotSeries& s = series[sidx];
        const char* color = kPalette[sidx % kPaletteSize];
        std::string pts;
        for (std::size_t m = 0; m < s.x.size() && m < s.y.size(); ++m) {
            if (!std::isfinite(s.x[m]) || !std::isfinite(s.y[m])) continue;
            if (!pts.empty()) pts += ' ';
            pts += num(px(s.x[m])) + "," + num(py(s.y[m]));
        }
        svg += "<polyline fill=\"none\" stroke=\"";
        svg += color;
        svg += "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        if (s.marker_x.has_value()) {
            const double mx = *s.marker_x;
            svg += "<path d=\"" +
                   star_path(px(mx), py(y_at(s, mx)), 8.0, 3.4) +
                   "\" fill=\"";
            svg += color;
            svg += "\" stroke=\"#333\" stroke-width=\"0.8\"/>\n";
        }
    }

    // Legend.
    for (std::size_t sidx = 0; sidx < series.size(); ++sidx) {
        const double ly = mt + 14.0 + 18.0 * static_cast<double>(sidx);
        const char* color = kPalette[sidx % kPaletteSize];
        svg += "<line x1=\"" + num(ml + pw + 12) + "\" y1=\"" + num(ly) +
               "\" x2=\"" + num(ml + pw + 34) + "\" y2=\"" + num(ly) +
               "\" stroke=\"";
        svg += color;
        svg += "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + num(ml + pw + 40) + "\" y=\"" + num(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" +
               escape_xml(series[sidx].label) + "</text>\n";
    }

    svg += "</svg>\n";
    return svg;
}

}  // namespace initlab
