#pragma once
// Minimal deterministic SVG output: heatmaps and x-y line/marker plots.
#include "csv.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace scatterlab::io {

namespace detail {

inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
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

/// Piecewise-linear approximation of the viridis colormap, t in [0, 1].
inline std::string colormap(double t) {
    static constexpr std::array<std::array<double, 3>, 5> stops{{
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
    const double f = t - static_cast<double>(i);
    char buf[8];
    int rgb[3];
    for (int c = 0; c < 3; ++c)
        rgb[c] = static_cast<int>(std::lround(stops[i][c] + f * (stops[i + 1][c] - stops[i][c])));
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
}

} // namespace detail

/// Row-major grid of values rendered with a sqrt-compressed colormap.
struct Heatmap {
    std::string title;
    std::string x_label;
    std::string y_label;
    int rows = 0;
    int cols = 0;
    double x_min = 0.0, x_max = 1.0; ///< data coordinates of the first/last column
    std::vector<double> values;      ///< rows * cols, row 0 drawn at the top
    std::vector<std::string> row_labels;
};

inline std::string render(const Heatmap& h) {
    if (static_cast<std::size_t>(h.rows) * h.cols != h.values.size())
        throw std::invalid_argument("heatmap size mismatch");
    const double cell_w = std::max(1.0, 800.0 / std::max(1, h.cols));
    const double cell_h = std::max(4.0, std::min(16.0, 600.0 / std::max(1, h.rows)));
    const double left = 70, top = 40;
    const double width = left + cell_w * h.cols + 30, height = top + cell_h * h.rows + 60;
    double peak = 0.0;
    for (double v : h.values)
        peak = std::max(peak, v);
    if (peak <= 0.0)
        peak = 1.0;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::fmt(width) << "\" height=\""
       << detail::fmt(height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << detail::fmt(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
       << detail::escape(h.title) << "</text>\n";
    os << "<g shape-rendering=\"crispEdges\">\n";
    for (int r = 0; r < h.rows; ++r) {
        for (int c = 0; c < h.cols; ++c) {
            const double v = h.values[static_cast<std::size_t>(r) * h.cols + c];
            os << "<rect x=\"" << detail::fmt(left + c * cell_w) << "\" y=\"" << detail::fmt(top + r * cell_h)
               << "\" width=\"" << detail::fmt(cell_w) << "\" height=\"" << detail::fmt(cell_h) << "\" fill=\""
               << detail::colormap(std::sqrt(std::max(0.0, v) / peak)) << "\"/>\n";
        }
    }
    os << "</g>\n";
    for (int r = 0; r < h.rows && r < static_cast<int>(h.row_labels.size()); ++r)
        os << "<text x=\"" << detail::fmt(left - 6) << "\" y=\"" << detail::fmt(top + (r + 0.75) * cell_h)
           << "\" text-anchor=\"end\" font-size=\"" << detail::fmt(std::min(11.0, cell_h)) << "\">"
           << detail::escape(h.row_labels[r]) << "</text>\n";
    const double axis_y = top + h.rows * cell_h;
    for (int tick = 0; tick <= 4; ++tick) {
        const double f = tick / 4.0;
        const double x = left + f * cell_w * h.cols;
        os << "<line x1=\"" << detail::fmt(x) << "\" y1=\"" << detail::fmt(axis_y) << "\" x2=\"" << detail::fmt(x)
           << "\" y2=\"" << detail::fmt(axis_y + 5) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << detail::fmt(x) << "\" y=\"" << detail::fmt(axis_y + 18) << "\" text-anchor=\"middle\">"
           << format_number(h.x_min + f * (h.x_max - h.x_min)) << "</text>\n";
    }
    os << "<text x=\"" << detail::fmt(left + cell_w * h.cols / 2) << "\" y=\"" << detail::fmt(axis_y + 40)
       << "\" text-anchor=\"middle\">" << detail::escape(h.x_label) << "</text>\n";
    os << "<text transform=\"translate(16," << detail::fmt(top + h.rows * cell_h / 2)
       << ") rotate(-90)\" text-anchor=\"middle\">" << detail::escape(h.y_label) << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "black";
    bool markers = false; ///< draw open circles instead of a polyline
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    std::vector<double> vertical_markers; ///< dashed reference lines (e.g. eigenvalues)
};

inline std::string render(const LinePlot& p) {
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : p.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
                continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!(x1 > x0)) {
        x0 = 0.0;
        x1 = 1.0;
    }
    if (!(y1 > y0)) {
        y0 = std::isfinite(y0) ? y0 - 0.5 : 0.0;
        y1 = y0 + 1.0;
    }
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    const double left = 70, top = 40, w = 640, h = 400;
    auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * w; };
    auto sy = [&](double y) { return top + h - (y - y0) / (y1 - y0) * h; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::fmt(left + w + 180) << "\" height=\""
       << detail::fmt(top + h + 60) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << detail::fmt(left + w / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
       << detail::escape(p.title) << "</text>\n";
    os << "<rect x=\"" << detail::fmt(left) << "\" y=\"" << detail::fmt(top) << "\" width=\"" << detail::fmt(w)
       << "\" height=\"" << detail::fmt(h) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 5; ++tick) {
        const double f = tick / 5.0;
        const double xv = x0 + f * (x1 - x0), yv = y0 + f * (y1 - y0);
        os << "<text x=\"" << detail::fmt(sx(xv)) << "\" y=\"" << detail::fmt(top + h + 18)
           << "\" text-anchor=\"middle\">" << format_number(xv) << "</text>\n";
        os << "<text x=\"" << detail::fmt(left - 6) << "\" y=\"" << detail::fmt(sy(yv) + 4)
           << "\" text-anchor=\"end\">" << format_number(yv) << "</text>\n";
    }
    for (double m : p.vertical_markers)
        if (m >= x0 && m <= x1)
            os << "<line x1=\"" << detail::fmt(sx(m)) << "\" y1=\"" << detail::fmt(top) << "\" x2=\""
               << detail::fmt(sx(m)) << "\" y2=\"" << detail::fmt(top + h)
               << "\" stroke=\"red\" stroke-dasharray=\"3,3\" stroke-width=\"0.7\"/>\n";
    for (std::size_t k = 0; k < p.series.size(); ++k) {
        const auto& s = p.series[k];
        if (s.markers) {
            for (std::size_t i = 0; i < s.x.size(); ++i)
                if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
                    os << "<circle cx=\"" << detail::fmt(sx(s.x[i])) << "\" cy=\"" << detail::fmt(sy(s.y[i]))
                       << "\" r=\"4\" fill=\"none\" stroke=\"" << s.color << "\"/>\n";
        } else {
            os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
                    os << detail::fmt(sx(s.x[i])) << ',' << detail::fmt(sy(s.y[i])) << ' ';
            os << "\"/>\n";
        }
        const double ly = top + 14 + 18 * static_cast<double>(k);
        os << "<rect x=\"" << detail::fmt(left + w + 14) << "\" y=\"" << detail::fmt(ly - 8)
           << "\" width=\"10\" height=\"10\" fill=\"" << s.color << "\"/>\n";
        os << "<text x=\"" << detail::fmt(left + w + 30) << "\" y=\"" << detail::fmt(ly) << "\">"
           << detail::escape(s.name) << "</text>\n";
    }
    os << "<text x=\"" << detail::fmt(left + w / 2) << "\" y=\"" << detail::fmt(top + h + 40)
       << "\" text-anchor=\"middle\">" << detail::escape(p.x_label) << "</text>\n";
    os << "<text transform=\"translate(18," << detail::fmt(top + h / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
       << detail::escape(p.y_label) << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

template <class Figure>
void write_svg(const std::string& path, const Figure& figure) {
    detail::write_file(path, render(figure));
}

} // namespace scatterlab::io
