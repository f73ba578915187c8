#pragma once

// Static SVG plot of walks over a log-weight colour map.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "io.hpp"
#include "optcontour/grid.hpp"
#include "optcontour/sew.hpp"

namespace optcontour::svg {

inline std::string escape(std::string_view s) {
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

// Blue (light) to red (heavy).
inline std::string colour(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(255 * t));
    const int b = static_cast<int>(std::lround(255 * (1 - t)));
    const int g = static_cast<int>(std::lround(255 * (1 - std::abs(2 * t - 1)) * 0.8));
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

struct PlotInput {
    std::string title;
    double extent = 1.0;
    int order = 0;
    const AnalyticFunction* function = nullptr;
    std::vector<const Walk*> walks;   // drawn in order, last on top
    int samples = 48;                 // colour map resolution per side
};

inline std::string render(const PlotInput& in) {
    const double l = in.extent, half = 0.5 * l, pad = 0.05 * l;
    const double stroke = l / 400.0;
    auto X = [](double x) { return io::num(x); };
    auto Y = [](double y) { return io::num(-y); };
    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"" + X(-half - pad) + " " +
         X(-half - pad) + " " + X(l + 2 * pad) + " " + X(l + 2 * pad) + "\">\n";
    s += "<title>" + escape(in.title) + "</title>\n";
    s += "<defs><clipPath id=\"domain\"><rect x=\"" + X(-half) + "\" y=\"" + X(-half) + "\" width=\"" + X(l) +
         "\" height=\"" + X(l) + "\"/></clipPath></defs>\n";

    if (in.function) {
        const int k = std::max(2, in.samples);
        const double cell = l / k;
        std::vector<double> lw(static_cast<std::size_t>(k) * k);
        double lo = kInf, hi = -kInf;
        for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) {
                const cplx z(-half + (a + 0.5) * cell, -half + (b + 0.5) * cell);
                const double v = vertex_log_weight(z, in.order, *in.function);
                lw[a * k + b] = v;
                if (std::isfinite(v)) {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
        }
        // Saturate beyond 40 nats above the lightest sample.
        hi = std::min(hi, lo + 40.0);
        s += "<g id=\"weights\" shape-rendering=\"crispEdges\">\n";
        for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) {
                const double v = lw[a * k + b];
                const std::string fill = std::isfinite(v) ? colour(hi > lo ? (v - lo) / (hi - lo) : 0.0) : "#000000";
                s += "<rect x=\"" + X(-half + a * cell) + "\" y=\"" + Y(-half + (b + 1) * cell) + "\" width=\"" +
                     X(cell) + "\" height=\"" + X(cell) + "\" fill=\"" + fill + "\"/>\n";
            }
        }
        s += "</g>\n";
        s += "<g id=\"features\" clip-path=\"url(#domain)\" stroke=\"#000000\" stroke-width=\"" + X(2 * stroke) +
             "\" fill=\"none\">\n";
        for (const auto& f : in.function->singularities()) {
            switch (f.kind) {
                case FeatureKind::point:
                    s += "<circle cx=\"" + X(f.anchor.real()) + "\" cy=\"" + Y(f.anchor.imag()) + "\" r=\"" +
                         X(4 * stroke) + "\" fill=\"#000000\"/>\n";
                    break;
                case FeatureKind::ray_cut:
                case FeatureKind::segment_cut: {
                    const double len = f.kind == FeatureKind::ray_cut ? 4.0 * l + std::abs(f.anchor) : f.length;
                    const cplx e = f.anchor + len * f.direction;
                    s += "<line x1=\"" + X(f.anchor.real()) + "\" y1=\"" + Y(f.anchor.imag()) + "\" x2=\"" +
                         X(e.real()) + "\" y2=\"" + Y(e.imag()) + "\"/>\n";
                    break;
                }
            }
        }
        s += "</g>\n";
    }

    s += "<rect id=\"extent\" x=\"" + X(-half) + "\" y=\"" + X(-half) + "\" width=\"" + X(l) + "\" height=\"" + X(l) +
         "\" fill=\"none\" stroke=\"#404040\" stroke-width=\"" + X(stroke) + "\"/>\n";
    s += "<circle id=\"origin\" cx=\"0\" cy=\"0\" r=\"" + X(3 * stroke) + "\" fill=\"#ffffff\"/>\n";
    for (std::size_t k = 0; k < in.walks.size(); ++k) {
        const Walk& w = *in.walks[k];
        const bool last = k + 1 == in.walks.size();
        std::string pts;
        for (std::size_t i = 0; i <= w.points.size(); ++i) {
            const cplx z = w.points[i % w.points.size()];
            if (!pts.empty()) pts += ' ';
            pts += X(z.real()) + "," + Y(z.imag());
        }
        s += "<polyline class=\"walk\" points=\"" + pts + "\" fill=\"none\" stroke=\"" +
             std::string(last ? "#ff00ff" : "#ffffff") + "\" stroke-width=\"" + X((last ? 2 : 1) * stroke) + "\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace optcontour::svg
