#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "optcontour/analytic_function.hpp"
#include "optcontour/circle.hpp"
#include "optcontour/error.hpp"
#include "optcontour/quad.hpp"
#include "optcontour/refine.hpp"
#include "optcontour/sew.hpp"

namespace optcontour {

/// Everything a CLI run needs.
struct RunConfig {
    std::string function;
    int order = 0;
    cplx at{};                     // differentiation point
    int grid_size = 51;
    bool diagonals = true;
    SewAlgorithm algorithm = SewAlgorithm::heuristic;
    int levels = 6;
    double weight_tol = 0.1;       // nats
    double quad_tol = kDefaultQuadTol;
    std::optional<double> extent;
    unsigned threads = 0;
};

inline void validate(const RunConfig& c) {
    if (c.order < 0) throw Error(ErrorCode::invalid_argument, "order must be non-negative");
    if (c.grid_size < 3 || c.grid_size % 2 == 0) throw Error(ErrorCode::invalid_argument, "grid size must be odd and >= 3");
    if (c.levels < 0) throw Error(ErrorCode::invalid_argument, "levels must be non-negative");
    if (!(c.quad_tol > 0.0)) throw Error(ErrorCode::invalid_argument, "quadrature tolerance must be positive");
    if (c.extent && !(*c.extent > 0.0)) throw Error(ErrorCode::invalid_argument, "extent must be positive");
}

inline RefinementConfig refinement_config(const RunConfig& c) {
    RefinementConfig r;
    r.initial_m = c.grid_size;
    r.max_levels = c.levels;
    r.weight_decrease_tol = c.weight_tol;
    r.use_heuristic = c.algorithm == SewAlgorithm::heuristic;
    r.diagonals = c.diagonals;
    r.extent = c.extent;
    r.threads = c.threads;
    return r;
}

/// Parsed function, recentred so that the differentiation point is 0.
inline std::shared_ptr<const AnalyticFunction> prepare_function(const RunConfig& c) {
    AnalyticFunction f = AnalyticFunction::parse(c.function);
    if (c.at != cplx{}) f = f.shifted(c.at);
    return std::make_shared<const AnalyticFunction>(std::move(f));
}

inline OptimizationResult run_contour(const RunConfig& c, const std::shared_ptr<const AnalyticFunction>& f,
                                      const LevelCallback& on_level = {}) {
    validate(c);
    return optimize_contour(f, c.order, refinement_config(c), on_level);
}

struct PipelineResult {
    std::shared_ptr<const AnalyticFunction> function;
    OptimizationResult contour;
    DerivativeResult derivative;
};

/// shift, extent, grid, SEW, refinement, quadrature.
inline PipelineResult run_derive(const RunConfig& c, const LevelCallback& on_level = {}) {
    validate(c);
    PipelineResult r;
    r.function = prepare_function(c);
    r.contour = run_contour(c, r.function, on_level);
    r.derivative = integrate_contour(r.contour.walk, c.order, *r.function, c.quad_tol);
    return r;
}

struct CircleComparison {
    int order = 0;
    double log10_kappa_sew = kNaN;
    CircleResult circle;
    bool converged = false;
};

inline CircleComparison compare_circle(const RunConfig& c) {
    const PipelineResult p = run_derive(c);
    CircleComparison out;
    out.order = c.order;
    out.log10_kappa_sew = p.derivative.log10_kappa;
    out.converged = p.derivative.converged;
    out.circle = optimal_radius(c.order, *p.function);
    return out;
}

struct ConvergenceRow {
    bool diagonals = true;
    std::size_t node_count = 0;   // per segment
    std::size_t total_nodes = 0;
    ScaledComplex taylor_coeff;
    double relative_error = kNaN;
};

/// Fixed-rule sweep over the node schedule on the optimised walk, errors
/// measured against the richest result over all requested grids.
inline std::vector<ConvergenceRow> convergence_trace(const RunConfig& c, bool both_grids) {
    validate(c);
    const auto f = prepare_function(c);
    std::vector<ConvergenceRow> rows;
    std::vector<bool> grids{c.diagonals};
    if (both_grids) grids = {true, false};
    for (bool diag : grids) {
        RunConfig g = c;
        g.diagonals = diag;
        const OptimizationResult opt = run_contour(g, f);
        for (const auto& s : integrate_schedule(opt.walk, c.order, *f)) {
            rows.push_back({diag, s.node_count, s.total_nodes, s.taylor_coeff, kNaN});
        }
    }
    const auto richest = std::max_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.total_nodes < b.total_nodes;
    });
    const ScaledComplex ref = richest->taylor_coeff;
    for (auto& r : rows) r.relative_error = relative_difference(r.taylor_coeff, ref);
    return rows;
}

}  // namespace optcontour
