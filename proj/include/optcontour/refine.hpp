#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "optcontour/analytic_function.hpp"
#include "optcontour/circle.hpp"
#include "optcontour/error.hpp"
#include "optcontour/grid.hpp"
#include "optcontour/sew.hpp"

namespace optcontour {

struct RefinementConfig {
    int initial_m = 51;
    int max_levels = 6;                 // refinement steps after the initial grid
    double weight_decrease_tol = 0.1;   // nats
    double l_growth = 2.0;
    double l_max = 1e6;
    bool use_heuristic = true;
    bool diagonals = true;
    double tube_threshold = 1e-24;
    std::optional<double> extent;       // skips the extent search
    unsigned threads = 0;
};

inline Walk find_sew(const ContourGraph& g, const RefinementConfig& cfg) {
    return cfg.use_heuristic ? heuristic_sew(g) : provan_sew(g, cfg.threads);
}

// ---------------------------------------------------------------------------
// Extent

struct ExtentStep {
    double l = 0.0;
    double log_weight = kInf;  // +inf if no enclosing walk fits the grid
};

struct ExtentChoice {
    double l = 0.0;
    bool entire = false;
    std::optional<CircleResult> circle;
    std::vector<ExtentStep> steps;
};

/// Whether f looks entire: nothing singular declared and log f finite at 16
/// points on the circle of radius `radius`.
inline bool probes_entire(const AnalyticFunction& f, double radius) {
    if (f.has_declared_singularities()) return false;
    for (int k = 0; k < 16; ++k) {
        const LogValue v = f.eval_log(std::polar(radius, kTwoPi * k / 16.0));
        if (std::isnan(v.re) || std::isnan(v.im) || v.re == kInf) return false;
    }
    return true;
}

namespace detail {

inline double sew_weight_or_inf(const std::shared_ptr<const AnalyticFunction>& f, int n, double l,
                                const RefinementConfig& cfg) {
    try {
        return find_sew(build_grid(f, n, l, cfg.initial_m, cfg.diagonals), cfg).total_log_weight;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::no_enclosing_walk) return kInf;
        throw;
    }
}

}  // namespace detail

/// Side length of the initial grid.
///
/// Entire functions with an interior optimal circle get l = 3 r*. Otherwise l
/// doubles from 1 on a fixed m x m grid until the SEW weight improves by less
/// than the tolerance; the best l seen is returned.
inline ExtentChoice choose_extent(std::shared_ptr<const AnalyticFunction> f, int n, const RefinementConfig& cfg) {
    ExtentChoice out;
    if (!f->has_declared_singularities()) {
        try {
            const CircleResult c = optimal_radius(n, *f);
            out.circle = c;
            if (c.flag == RadiusFlag::interior && probes_entire(*f, 3.0 * c.r_star)) {
                out.entire = true;
                out.l = 3.0 * c.r_star;
                return out;
            }
        } catch (const Error&) {
            // Fall through to the search.
        }
    }
    double l = 1.0;
    double w = detail::sew_weight_or_inf(f, n, l, cfg);
    out.steps.push_back({l, w});
    // Too coarse to fit a walk around the nearest singularity: shrink first.
    for (int k = 0; k < 30 && w == kInf; ++k) {
        l /= cfg.l_growth;
        w = detail::sew_weight_or_inf(f, n, l, cfg);
        out.steps.push_back({l, w});
    }
    if (w == kInf) throw Error(ErrorCode::no_enclosing_walk, "choose_extent: no grid encloses the origin");
    double best_l = l, best_w = w;
    for (;;) {
        const double next_l = l * cfg.l_growth;
        if (next_l > cfg.l_max) {
            throw Error(ErrorCode::extent_search, "choose_extent: l_max exceeded without stabilisation");
        }
        const double next_w = detail::sew_weight_or_inf(f, n, next_l, cfg);
        out.steps.push_back({next_l, next_w});
        if (next_w < best_w) {
            best_w = next_w;
            best_l = next_l;
        }
        const double improvement = w - next_w;
        l = next_l;
        w = next_w;
        if (!(improvement >= cfg.weight_decrease_tol)) break;
    }
    out.l = best_l;
    return out;
}

// ---------------------------------------------------------------------------
// Tubular refinement

namespace detail {

inline bool on_cell_boundary(const Cell& c, long p, long q) {
    if (p < c.i || p > c.i + c.size || q < c.j || q > c.j + c.size) return false;
    return p == c.i || p == c.i + c.size || q == c.j || q == c.j + c.size;
}

}  // namespace detail

/// Keeps only the cells touching the walk, halving the step.
///
/// A touching cell is split into four when some walk edge at it has log weight
/// above max + log(threshold); otherwise it is kept whole. Lattice coordinates
/// double, so old vertices keep their weights.
inline ContourGraph refine_tube(const ContourGraph& g, const Walk& w, double threshold) {
    if (!g.is_lattice() || !g.source()) {
        throw Error(ErrorCode::invalid_argument, "refine_tube: graph has no cell structure");
    }
    std::unordered_map<std::int64_t, double> local;  // walk vertex -> max incident walk-edge log weight
    double wmax = -kInf;
    const std::size_t m = w.size();
    for (std::size_t k = 0; k < m; ++k) {
        const double lw = w.edge_log_weights[k];
        wmax = std::max(wmax, lw);
        for (VertexId v : {w.vertices[k], w.vertices[(k + 1) % m]}) {
            const Vertex& x = g.vertex(v);
            auto [it, fresh] = local.emplace(ContourGraph::key(x.i, x.j), lw);
            if (!fresh) it->second = std::max(it->second, lw);
        }
    }
    const double cutoff = wmax + std::log(threshold);

    std::vector<Cell> cells;
    for (const Cell& c : g.cells()) {
        bool touches = false;
        double cell_max = -kInf;
        // Boundary lattice points of the cell.
        for (long t = 0; t < 4 * c.size; ++t) {
            long p, q;
            const long side = t / c.size, off = t % c.size;
            switch (side) {
                case 0: p = c.i + off; q = c.j; break;
                case 1: p = c.i + c.size; q = c.j + off; break;
                case 2: p = c.i + c.size - off; q = c.j + c.size; break;
                default: p = c.i; q = c.j + c.size - off; break;
            }
            auto it = local.find(ContourGraph::key(p, q));
            if (it != local.end()) {
                touches = true;
                cell_max = std::max(cell_max, it->second);
            }
        }
        if (!touches) continue;
        if (cell_max > cutoff && c.size == 1) {
            for (long a = 0; a < 2; ++a) {
                for (long b = 0; b < 2; ++b) cells.push_back({2 * c.i + a, 2 * c.j + b, 1});
            }
        } else if (cell_max > cutoff) {
            // A coarse cell kept earlier: split it into four of half its size.
            const long s = c.size;
            for (long a = 0; a < 2; ++a) {
                for (long b = 0; b < 2; ++b) cells.push_back({2 * c.i + a * s, 2 * c.j + b * s, s});
            }
        } else {
            cells.push_back({2 * c.i, 2 * c.j, 2 * c.size});
        }
    }
    std::unordered_map<std::int64_t, double> known;
    known.reserve(g.vertex_count());
    for (const auto& v : g.vertices()) known.emplace(ContourGraph::key(2 * v.i, 2 * v.j), v.log_weight);
    return detail::assemble_lattice(std::move(cells), 0.5 * g.step(), g.extent(), g.diagonals(), *g.source(), known);
}

/// The walk w of g expressed in refine_tube(g, ...): each edge becomes its two
/// halves where the midpoint exists, else the undivided edge.
inline std::optional<Walk> embed_walk(const ContourGraph& coarse, const Walk& w, const ContourGraph& fine) {
    std::vector<VertexId> seq;
    const std::size_t m = w.size();
    for (std::size_t k = 0; k < m; ++k) {
        const Vertex& a = coarse.vertex(w.vertices[k]);
        const Vertex& b = coarse.vertex(w.vertices[(k + 1) % m]);
        const auto fa = fine.vertex_at(2 * a.i, 2 * a.j);
        const auto fb = fine.vertex_at(2 * b.i, 2 * b.j);
        if (!fa || !fb) return std::nullopt;
        const auto mid = fine.vertex_at(a.i + b.i, a.j + b.j);
        seq.push_back(*fa);
        if (mid && fine.find_edge(*fa, *mid) && fine.find_edge(*mid, *fb)) {
            seq.push_back(*mid);
        } else if (!fine.find_edge(*fa, *fb)) {
            return std::nullopt;
        }
    }
    return make_walk(fine, canonical_rotation(std::move(seq)));
}

// ---------------------------------------------------------------------------
// Driver

struct LevelRecord {
    int level = 0;
    double h = 0.0;
    std::size_t vertices = 0;
    std::size_t edges = 0;
    double log_weight = kInf;  // SEW found on this level
    Walk walk;
};

struct OptimizationResult {
    Walk walk;                  // lightest walk over all levels
    ContourGraph graph;         // the graph holding `walk`
    ExtentChoice extent;
    std::vector<LevelRecord> levels;
};

using LevelCallback = std::function<void(const LevelRecord&)>;

/// Extent choice, initial grid, SEW, then tubular refinement while the
/// weight keeps dropping by at least the tolerance.
inline OptimizationResult optimize_contour(std::shared_ptr<const AnalyticFunction> f, int n,
                                           const RefinementConfig& cfg, const LevelCallback& on_level = {}) {
    if (n < 0) throw Error(ErrorCode::invalid_argument, "order must be non-negative");
    if (cfg.initial_m < 3 || cfg.initial_m % 2 == 0) {
        throw Error(ErrorCode::invalid_argument, "grid size must be odd and >= 3");
    }
    OptimizationResult res;
    if (cfg.extent) {
        res.extent.l = *cfg.extent;
    } else {
        res.extent = choose_extent(f, n, cfg);
    }
    ContourGraph g = build_grid(f, n, res.extent.l, cfg.initial_m, cfg.diagonals);
    Walk w = find_sew(g, cfg);
    auto record = [&](int level, const ContourGraph& gr, const Walk& wk) {
        LevelRecord r{level, gr.step(), gr.vertex_count(), gr.edge_count(), wk.total_log_weight, wk};
        if (on_level) on_level(r);
        res.levels.push_back(std::move(r));
    };
    record(0, g, w);
    res.walk = w;
    res.graph = g;
    for (int level = 1; level <= cfg.max_levels; ++level) {
        ContourGraph fine = refine_tube(g, w, cfg.tube_threshold);
        Walk next;
        try {
            next = find_sew(fine, cfg);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::no_enclosing_walk) throw;
            break;
        }
        record(level, fine, next);
        const double improvement = w.total_log_weight - next.total_log_weight;
        if (next.total_log_weight < res.walk.total_log_weight) {
            res.walk = next;
            res.graph = fine;
        }
        g = std::move(fine);
        w = std::move(next);
        if (!(improvement >= cfg.weight_decrease_tol)) break;
    }
    return res;
}

inline OptimizationResult optimize_contour(const AnalyticFunction& f, int n, const RefinementConfig& cfg) {
    return optimize_contour(std::make_shared<const AnalyticFunction>(f), n, cfg);
}

}  // namespace optcontour
