#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lipro {

struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

/// Minimal line chart, enough for convergence and modulus-vs-lambda curves.
/// Log-scaled axes drop non-positive points.
inline void write_svg_lines(const std::string& path, const std::string& title,
                            const std::string& xlabel, const std::string& ylabel,
                            const std::vector<SvgSeries>& series, bool logx = false,
                            bool logy = false) {
    const double W = 720, H = 440, ml = 70, mr = 160, mt = 40, mb = 50;
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series) {
        for (auto [x, y] : s.points) {
            if (logx && x <= 0.0) continue;
            if (logy && y <= 0.0) continue;
            const double xv = logx ? std::log10(x) : x;
            const double yv = logy ? std::log10(y) : y;
            xmin = std::min(xmin, xv); xmax = std::max(xmax, xv);
            ymin = std::min(ymin, yv); ymax = std::max(ymax, yv);
        }
    }
    if (xmin > xmax) { xmin = 0; xmax = 1; }
    if (ymin > ymax) { ymin = 0; ymax = 1; }
    if (xmax == xmin) { xmax += 0.5; xmin -= 0.5; }
    if (ymax == ymin) { ymax += 0.5; ymin -= 0.5; }

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    std::ostringstream svg;
    svg << std::setprecision(8);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";
    // axes
    svg << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
        << H - mb << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 4.0;
        const double yv = ymin + (ymax - ymin) * i / 4.0;
        std::ostringstream xm, ym;
        xm << std::setprecision(3) << (logx ? std::pow(10.0, xv) : xv);
        ym << std::setprecision(3) << (logy ? std::pow(10.0, yv) : yv);
        svg << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << xm.str() << "</text>\n";
        svg << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << ym.str() << "</text>\n";
        svg << "<line x1=\"" << px(xv) << "\" y1=\"" << H - mb << "\" x2=\"" << px(xv)
            << "\" y2=\"" << H - mb + 4 << "\" stroke=\"black\"/>\n";
        svg << "<line x1=\"" << ml - 4 << "\" y1=\"" << py(yv) << "\" x2=\"" << ml << "\" y2=\""
            << py(yv) << "\" stroke=\"black\"/>\n";
    }
    svg << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel << "</text>\n";
    svg << "<text x=\"18\" y=\"" << (mt + H - mb) / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
        << (mt + H - mb) / 2 << ")\">" << ylabel << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = colors[s % 6];
        std::ostringstream pts;
        for (auto [x, y] : series[s].points) {
            if (logx && x <= 0.0) continue;
            if (logy && y <= 0.0) continue;
            pts << px(logx ? std::log10(x) : x) << "," << py(logy ? std::log10(y) : y) << " ";
        }
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\""
            << pts.str() << "\"/>\n";
        svg << "<text x=\"" << W - mr + 10 << "\" y=\"" << mt + 16 * (s + 1)
            << "\" font-size=\"12\" fill=\"" << color << "\">" << series[s].label << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write " + path);
    out << svg.str();
}

}  // namespace lipro
