#pragma once

// JSON and CSV output for the command-line tool.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <json.hpp>

#include "optcontour/pipeline.hpp"

namespace optcontour::io {

using json = nlohmann::ordered_json;

inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json scaled_json(const ScaledComplex& s) {
    return {{"re", number(s.mantissa().real())}, {"im", number(s.mantissa().imag())}, {"exp10", s.exp10()}};
}

inline json point_json(cplx z) { return json::array({number(z.real()), number(z.imag())}); }

inline json graph_json(const ContourGraph& g) {
    json verts = json::array(), edges = json::array();
    for (const auto& v : g.vertices()) verts.push_back(point_json(v.z));
    for (const auto& e : g.edges()) edges.push_back(json::array({e.u, e.v, number(e.log_weight)}));
    return {{"h", g.step()}, {"l", g.extent()}, {"vertices", std::move(verts)}, {"edges", std::move(edges)}};
}

inline json walk_json(const Walk& w) {
    json pts = json::array();
    for (cplx z : w.points) pts.push_back(point_json(z));
    return {{"vertices", std::move(pts)},
            {"closed", true},
            {"winding", w.winding},
            {"log10_weight", number(w.total_log_weight / std::numbers::ln10)}};
}

inline json level_json(const LevelRecord& r) {
    return {{"level", r.level},
            {"h", r.h},
            {"vertices", r.vertices},
            {"edges", r.edges},
            {"log10_weight", number(r.log_weight / std::numbers::ln10)}};
}

inline json derivative_json(const RunConfig& c, const PipelineResult& p) {
    const DerivativeResult& d = p.derivative;
    json levels = json::array();
    for (const auto& r : p.contour.levels) levels.push_back(level_json(r));
    return {{"function", c.function},
            {"order", c.order},
            {"at", point_json(c.at)},
            {"extent", p.contour.extent.l},
            {"taylor_coeff", scaled_json(d.taylor_coeff)},
            {"derivative", scaled_json(d.derivative)},
            {"log10_kappa", number(d.log10_kappa)},
            {"nodes_used", d.nodes_used},
            {"segments_used", d.segments_used},
            {"segments_neglected", d.segments_neglected},
            {"converged", d.converged},
            {"walk_edges", p.contour.walk.size()},
            {"levels", std::move(levels)}};
}

inline json circle_json(const CircleResult& c) {
    return {{"r_star", number(c.r_star)},
            {"log_weight", number(c.log_weight)},
            {"log10_kappa", number(c.log10_kappa)},
            {"samples", c.samples},
            {"flag", radius_flag_name(c.flag)}};
}

inline json error_json(ErrorCode code, const std::string& message) {
    return {{"error", {{"code", static_cast<int>(code)}, {"name", error_code_name(code)}, {"message", message}}}};
}

/// Round-trip decimal text for CSV cells.
inline std::string num(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline std::string scaled_text(const ScaledComplex& s) {
    return num(s.mantissa().real()) + "," + num(s.mantissa().imag()) + "," + std::to_string(s.exp10());
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::invalid_argument, "cannot open " + path + " for writing");
    out << text;
    if (!out) throw Error(ErrorCode::invalid_argument, "write to " + path + " failed");
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump() + "\n"); }

inline std::string levels_csv(const std::vector<LevelRecord>& levels) {
    std::string s = "level,h,vertices,edges,log10_weight\n";
    for (const auto& r : levels) {
        s += std::to_string(r.level) + "," + num(r.h) + "," + std::to_string(r.vertices) + "," +
             std::to_string(r.edges) + "," + num(r.log_weight / std::numbers::ln10) + "\n";
    }
    return s;
}

inline std::string trace_csv(const std::vector<TraceRow>& trace) {
    std::string s = "round,total_nodes,taylor_re,taylor_im,taylor_exp10,relative_change\n";
    for (const auto& r : trace) {
        s += std::to_string(r.round) + "," + std::to_string(r.total_nodes) + "," + scaled_text(r.taylor_coeff) + "," +
             num(r.relative_change) + "\n";
    }
    return s;
}

inline std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
    std::string s = "diagonals,node_count,total_nodes,relative_error\n";
    for (const auto& r : rows) {
        s += std::string(r.diagonals ? "on" : "off") + "," + std::to_string(r.node_count) + "," +
             std::to_string(r.total_nodes) + "," + num(r.relative_error) + "\n";
    }
    return s;
}

}  // namespace optcontour::io
