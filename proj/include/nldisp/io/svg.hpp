#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "nldisp/error.hpp"

namespace nldisp::io {

struct PlotLabels {
    std::string title;
    std::string x;
    std::string y;
};

namespace detail {

inline std::string svg_escape(const std::string& s) {
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

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace detail

/// Single-series line plot: polyline, axes box, and min/max tick labels.
/// Non-finite points are skipped; log_x plots log10(x).
inline std::string line_plot(const std::vector<double>& xs, const std::vector<double>& ys, bool log_x,
                             const PlotLabels& labels) {
    if (xs.size() != ys.size()) throw DomainError("line_plot: x and y lengths differ");
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double x = log_x ? (xs[k] > 0.0 ? std::log10(xs[k]) : NAN) : xs[k];
        if (std::isfinite(x) && std::isfinite(ys[k])) pts.emplace_back(x, ys[k]);
    }
    const double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (!pts.empty()) {
        x0 = x1 = pts[0].first;
        y0 = y1 = pts[0].second;
        for (const auto& [x, y] : pts) {
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    const auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    using detail::num;
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" + num(H) + "\">\n";
    s += "<rect x=\"" + num(L) + "\" y=\"" + num(T) + "\" width=\"" + num(W - L - R) + "\" height=\"" +
         num(H - T - B) + "\" fill=\"none\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(W / 2) + "\" y=\"24\" text-anchor=\"middle\">" + detail::svg_escape(labels.title) + "</text>\n";
    s += "<text x=\"" + num(W / 2) + "\" y=\"" + num(H - 10) + "\" text-anchor=\"middle\">" +
         detail::svg_escape(log_x ? "log10 " + labels.x : labels.x) + "</text>\n";
    s += "<text x=\"16\" y=\"" + num(H / 2) + "\" transform=\"rotate(-90 16 " + num(H / 2) +
         ")\" text-anchor=\"middle\">" + detail::svg_escape(labels.y) + "</text>\n";
    s += "<text x=\"" + num(L) + "\" y=\"" + num(H - B + 16) + "\" text-anchor=\"middle\">" + num(x0) + "</text>\n";
    s += "<text x=\"" + num(W - R) + "\" y=\"" + num(H - B + 16) + "\" text-anchor=\"middle\">" + num(x1) + "</text>\n";
    s += "<text x=\"" + num(L - 4) + "\" y=\"" + num(H - B) + "\" text-anchor=\"end\">" + num(y0) + "</text>\n";
    s += "<text x=\"" + num(L - 4) + "\" y=\"" + num(T + 4) + "\" text-anchor=\"end\">" + num(y1) + "</text>\n";
    s += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (k > 0) s += ' ';
        s += num(sx(pts[k].first)) + "," + num(sy(pts[k].second));
    }
    s += "\"/>\n</svg>\n";
    return s;
}

}  // namespace nldisp::io
