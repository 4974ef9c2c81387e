#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cofo/common.hpp"
#include "cofo/csv.hpp"

namespace cofo {

/// Batch line/scatter charts written as standalone SVG. No timestamps or
/// other volatile metadata, so output is byte-identical across runs.
class SvgChart {
public:
    struct Series {
        std::string label;
        std::string color;
        bool line = true;
        bool markers = false;
        std::vector<std::pair<double, double>> points;
    };

    SvgChart(std::string title, std::string x_label, std::string y_label)
        : title_(std::move(title)), x_label_(std::move(x_label)),
          y_label_(std::move(y_label)) {}

    void add_series(Series series) { series_.push_back(std::move(series)); }

    void write(const std::filesystem::path& path, const ArtifactMeta& meta) const {
        std::ofstream out(path);
        if (!out) throw ConfigError("cannot write " + path.string());
        double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
        bool first = true;
        for (const auto& s : series_)
            for (const auto& [x, y] : s.points) {
                if (first) {
                    xmin = xmax = x;
                    ymin = ymax = y;
                    first = false;
                } else {
                    xmin = std::min(xmin, x);
                    xmax = std::max(xmax, x);
                    ymin = std::min(ymin, y);
                    ymax = std::max(ymax, y);
                }
            }
        if (xmax <= xmin) xmax = xmin + 1.0;
        if (ymax <= ymin) ymax = ymin + 1.0;
        const double width = 640.0, height = 420.0;
        const double left = 70.0, right = 20.0, top = 40.0, bottom = 50.0;
        auto px = [&](double x) {
            return left + (x - xmin) / (xmax - xmin) * (width - left - right);
        };
        auto py = [&](double y) {
            return height - bottom -
                   (y - ymin) / (ymax - ymin) * (height - top - bottom);
        };

        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        out << "<!-- coforecast config=" << std::hex << meta.config_hash
            << std::dec << " seed=" << meta.seed << " -->\n";
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
            << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
            << height << "\">\n";
        out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
               "font-family=\"sans-serif\" font-size=\"15\">"
            << escape(title_) << "</text>\n";

        // Axes with four ticks each.
        out << "<g stroke=\"black\" stroke-width=\"1\">\n";
        out << line(left, height - bottom, width - right, height - bottom);
        out << line(left, top, left, height - bottom);
        out << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
        for (int t = 0; t <= 4; ++t) {
            const double xv = xmin + (xmax - xmin) * t / 4.0;
            const double yv = ymin + (ymax - ymin) * t / 4.0;
            out << "<text x=\"" << format_double(px(xv)) << "\" y=\""
                << height - bottom + 16 << "\" text-anchor=\"middle\">"
                << tick_label(xv) << "</text>\n";
            out << "<text x=\"" << left - 6 << "\" y=\""
                << format_double(py(yv) + 4) << "\" text-anchor=\"end\">"
                << tick_label(yv) << "</text>\n";
        }
        out << "<text x=\"" << (left + width - right) / 2 << "\" y=\""
            << height - 12 << "\" text-anchor=\"middle\">" << escape(x_label_)
            << "</text>\n";
        out << "<text x=\"16\" y=\"" << (top + height - bottom) / 2
            << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
            << (top + height - bottom) / 2 << ")\">" << escape(y_label_)
            << "</text>\n</g>\n";

        double legend_y = top + 6.0;
        for (const auto& s : series_) {
            if (s.points.empty()) continue;
            if (s.line && s.points.size() > 1) {
                out << "<polyline fill=\"none\" stroke=\"" << s.color
                    << "\" stroke-width=\"1.5\" points=\"";
                for (const auto& [x, y] : s.points)
                    out << format_double(px(x)) << ',' << format_double(py(y)) << ' ';
                out << "\"/>\n";
            }
            if (s.markers || !s.line) {
                for (const auto& [x, y] : s.points)
                    out << "<circle cx=\"" << format_double(px(x)) << "\" cy=\""
                        << format_double(py(y)) << "\" r=\"2.5\" fill=\"" << s.color
                        << "\"/>\n";
            }
            if (!s.label.empty()) {
                out << "<rect x=\"" << width - right - 150 << "\" y=\""
                    << legend_y - 8 << "\" width=\"10\" height=\"10\" fill=\""
                    << s.color << "\"/>\n";
                out << "<text x=\"" << width - right - 136 << "\" y=\"" << legend_y
                    << "\" font-family=\"sans-serif\" font-size=\"11\">"
                    << escape(s.label) << "</text>\n";
                legend_y += 16.0;
            }
        }
        out << "</svg>\n";
    }

private:
    static std::string line(double x1, double y1, double x2, double y2) {
        return "<line x1=\"" + format_double(x1) + "\" y1=\"" + format_double(y1) +
               "\" x2=\"" + format_double(x2) + "\" y2=\"" + format_double(y2) +
               "\"/>\n";
    }

    static std::string tick_label(double v) {
        const double rounded = std::round(v * 100.0) / 100.0;
        if (rounded == std::floor(rounded) && std::fabs(rounded) < 1e7) {
            return std::to_string(static_cast<long>(rounded));
        }
        return format_double(rounded);
    }

    static std::string escape(const std::string& s) {
        std::string out;
        for (char c : s) {
            if (c == '<') out += "&lt;";
            else if (c == '>') out += "&gt;";
            else if (c == '&') out += "&amp;";
            else out += c;
        }
        return out;
    }

    std::string title_, x_label_, y_label_;
    std::vector<Series> series_;
};

}  // namespace cofo
