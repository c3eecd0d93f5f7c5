#include "phaselab/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "phaselab/errors.hpp"

namespace phaselab::plot {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                          "#bcbd22", "#17becf"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

} // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<std::string>& categories,
                      const std::vector<Series>& series,
                      const std::string& y_label) {
    if (categories.empty() || series.empty()) {
        throw InvalidInput("write_line_chart: nothing to plot");
    }

    double y_max = 0.0;
    for (const auto& s : series) {
        for (double v : s.values) {
            if (std::isfinite(v)) y_max = std::max(y_max, v);
        }
    }
    if (y_max <= 0.0) y_max = 1.0;
    y_max *= 1.1;

    const double width = 640.0, height = 420.0;
    const double left = 70.0, right = width - 160.0;
    const double top = 50.0, bottom = height - 60.0;
    const double x_step = (categories.size() > 1)
                              ? (right - left) / (categories.size() - 1.0)
                              : 0.0;
    auto x_at = [&](std::size_t i) { return left + x_step * i; };
    auto y_at = [&](double v) { return bottom - (v / y_max) * (bottom - top); };

    std::ofstream f(path);
    if (!f) throw InvalidInput("cannot open plot file: " + path);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"sans-serif\">\n";
    f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    f << "<text x=\"" << (left + (right - left) / 2) << "\" y=\"24\" "
      << "text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";

    // Horizontal gridlines at 5 divisions.
    for (int g = 0; g <= 5; ++g) {
        const double v = y_max * g / 5.0;
        const double y = y_at(v);
        f << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << right
          << "\" y2=\"" << y << "\" stroke=\"#dddddd\"/>\n";
        f << "<text x=\"" << (left - 8) << "\" y=\"" << (y + 4)
          << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(v * 100.0)
          << "</text>\n";
    }
    f << "<text x=\"16\" y=\"" << (top + (bottom - top) / 2)
      << "\" font-size=\"12\" transform=\"rotate(-90 16 "
      << (top + (bottom - top) / 2) << ")\" text-anchor=\"middle\">" << y_label
      << "</text>\n";

    for (std::size_t i = 0; i < categories.size(); ++i) {
        f << "<text x=\"" << x_at(i) << "\" y=\"" << (bottom + 18)
          << "\" text-anchor=\"middle\" font-size=\"11\">" << categories[i]
          << "</text>\n";
    }
    f << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right
      << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n";
    f << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(*kPalette))];
        f << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0;
             i < std::min(series[s].values.size(), categories.size()); ++i) {
            const double v = series[s].values[i];
            if (!std::isfinite(v)) continue;
            f << x_at(i) << ',' << y_at(v) << ' ';
        }
        f << "\"/>\n";
        for (std::size_t i = 0;
             i < std::min(series[s].values.size(), categories.size()); ++i) {
            const double v = series[s].values[i];
            if (!std::isfinite(v)) continue;
            f << "<circle cx=\"" << x_at(i) << "\" cy=\"" << y_at(v)
              << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        }
        const double ly = top + 16.0 * s;
        f << "<line x1=\"" << (right + 10) << "\" y1=\"" << ly << "\" x2=\""
          << (right + 30) << "\" y2=\"" << ly << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
        f << "<text x=\"" << (right + 36) << "\" y=\"" << (ly + 4)
          << "\" font-size=\"11\">" << series[s].name << "</text>\n";
    }
    f << "</svg>\n";
    if (!f) throw InvalidInput("short write: " + path);
}

} // namespace phaselab::plot
