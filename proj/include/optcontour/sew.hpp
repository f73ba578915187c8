#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "optcontour/error.hpp"
#include "optcontour/grid.hpp"
#include "optcontour/log_value.hpp"

namespace optcontour {

/// Closed walk v_1 ... v_m (edge v_m v_1 implied).
///
/// `edge_log_weights[k]` belongs to the edge from vertex k to vertex k+1 (mod m).
/// `total_log_weight` is the fold of those weights in walk order.
struct Walk {
    std::vector<VertexId> vertices;
    std::vector<cplx> points;
    std::vector<double> edge_log_weights;
    double total_log_weight = -kInf;
    int winding = 0;

    std::size_t size() const { return vertices.size(); }
};

/// round(sum arg(z_{k+1}/z_k) / 2 pi) over a closed polygon avoiding 0.
inline int winding_number(const std::vector<cplx>& points) {
    double total = 0.0;
    const std::size_t m = points.size();
    for (std::size_t k = 0; k < m; ++k) total += std::arg(points[(k + 1) % m] / points[k]);
    return static_cast<int>(std::lround(total / kTwoPi));
}

inline int winding_number(const Walk& w) { return winding_number(w.points); }

/// logaddexp fold of edge weights in the given order.
inline double fold_log_weights(const std::vector<double>& ws) {
    double total = -kInf;
    for (double x : ws) total = logaddexp(total, x);
    return total;
}

/// Builds a Walk from a closed vertex sequence of g, in the order given.
inline Walk make_walk(const ContourGraph& g, std::vector<VertexId> seq) {
    Walk w;
    const std::size_t m = seq.size();
    w.points.reserve(m);
    w.edge_log_weights.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        const VertexId a = seq[k], b = seq[(k + 1) % m];
        const auto e = g.find_edge(a, b);
        if (!e) throw Error(ErrorCode::invalid_argument, "make_walk: consecutive vertices are not adjacent");
        w.points.push_back(g.vertex(a).z);
        w.edge_log_weights.push_back(g.edge(*e).log_weight);
    }
    w.vertices = std::move(seq);
    w.total_log_weight = fold_log_weights(w.edge_log_weights);
    w.winding = winding_number(w.points);
    return w;
}

/// Removes backtracks u -> v -> u (including across the wrap-around).
inline std::vector<VertexId> trim_spurs(const std::vector<VertexId>& seq) {
    std::vector<VertexId> out;
    out.reserve(seq.size());
    for (VertexId v : seq) {
        if (out.size() >= 2 && out[out.size() - 2] == v) {
            out.pop_back();
        } else if (out.empty() || out.back() != v) {
            out.push_back(v);
        }
    }
    // Spurs straddling the closing edge.
    std::size_t lo = 0, hi = out.size();
    while (hi - lo >= 3) {
        if (out[lo] == out[hi - 1]) {
            --hi;
        } else if (out[lo + 1] == out[hi - 1]) {
            ++lo;
        } else if (out[lo] == out[hi - 2]) {
            --hi;
        } else {
            break;
        }
    }
    return {out.begin() + static_cast<std::ptrdiff_t>(lo), out.begin() + static_cast<std::ptrdiff_t>(hi)};
}

/// Rotates a closed sequence to start at its smallest vertex index (first occurrence).
inline std::vector<VertexId> canonical_rotation(std::vector<VertexId> seq) {
    if (seq.empty()) return seq;
    const auto it = std::min_element(seq.begin(), seq.end());
    std::rotate(seq.begin(), it, seq.end());
    return seq;
}

/// Canonical form of an enclosing walk: spurs trimmed, rotated to its smallest
/// vertex. The weight fold then depends only on the cycle, so equal cycles
/// found by different algorithms carry bit-identical weights.
inline Walk canonical_walk(const ContourGraph& g, const std::vector<VertexId>& seq) {
    return make_walk(g, canonical_rotation(trim_spurs(seq)));
}

/// Strict total order used to pick among enclosing walks: weight, then edge
/// count, then vertex sequence.
inline bool walk_preferred(const Walk& a, const Walk& b) {
    if (a.total_log_weight != b.total_log_weight) return a.total_log_weight < b.total_log_weight;
    if (a.vertices.size() != b.vertices.size()) return a.vertices.size() < b.vertices.size();
    return a.vertices < b.vertices;
}

struct ShortestPathTree {
    static constexpr VertexId kNone = std::numeric_limits<VertexId>::max();

    VertexId source = 0;
    std::vector<double> dist;        // log weight; +inf if unreachable
    std::vector<VertexId> parent;    // kNone at the source and unreachable vertices
    std::vector<EdgeId> parent_edge;
    std::vector<double> angle;       // accumulated arg along the tree path from the source

    bool reachable(VertexId v) const { return dist[v] != kInf; }

    /// Vertex sequence source -> v.
    std::vector<VertexId> path_to(VertexId v) const {
        std::vector<VertexId> p;
        for (VertexId x = v; x != kNone; x = parent[x]) p.push_back(x);
        std::reverse(p.begin(), p.end());
        return p;
    }
};

/// Single-source shortest paths where a path costs the logaddexp of its edge
/// log weights. Binary heap; equal keys resolved by vertex index.
inline ShortestPathTree dijkstra_logsum(const ContourGraph& g, VertexId source) {
    const std::size_t nv = g.vertex_count();
    if (source >= nv) throw Error(ErrorCode::invalid_argument, "dijkstra_logsum: source not in graph");
    ShortestPathTree t;
    t.source = source;
    t.dist.assign(nv, kInf);
    t.parent.assign(nv, ShortestPathTree::kNone);
    t.parent_edge.assign(nv, ShortestPathTree::kNone);
    t.angle.assign(nv, 0.0);
    std::vector<char> done(nv, 0);

    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    t.dist[source] = -kInf;
    heap.emplace(-kInf, source);
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (done[v]) continue;
        done[v] = 1;
        const cplx zv = g.vertex(v).z;
        for (const auto& nb : g.neighbors(v)) {
            if (done[nb.vertex]) continue;
            const double nd = logaddexp(d, g.edge(nb.edge).log_weight);
            if (nd < t.dist[nb.vertex]) {
                t.dist[nb.vertex] = nd;
                t.parent[nb.vertex] = v;
                t.parent_edge[nb.vertex] = nb.edge;
                t.angle[nb.vertex] = t.angle[v] + std::arg(g.vertex(nb.vertex).z / zv);
                heap.emplace(nd, nb.vertex);
            }
        }
    }
    return t;
}

namespace detail {

struct TreeCandidate {
    double approx;  // dist(u) (+) w(uv) (+) dist(v)
    EdgeId edge;
    bool forward;   // traverse the edge u -> v (else v -> u)
};

// Candidates P_{s,a} . ab . P_{b,s} with winding +1, in the band
// [best, best + tol] of approximate weight, at most `cap` of them.
inline std::vector<TreeCandidate> enclosing_candidates(const ContourGraph& g, const ShortestPathTree& t,
                                                      std::size_t cap) {
    std::vector<TreeCandidate> all;
    double best = kInf;
    for (EdgeId k = 0; k < g.edge_count(); ++k) {
        const Edge& e = g.edge(k);
        if (!t.reachable(e.u) || !t.reachable(e.v)) continue;
        if (t.parent_edge[e.u] == k || t.parent_edge[e.v] == k) continue;
        const double turn = t.angle[e.u] + std::arg(g.vertex(e.v).z / g.vertex(e.u).z) - t.angle[e.v];
        const long wind = std::lround(turn / kTwoPi);
        if (wind != 1 && wind != -1) continue;
        const double approx = logaddexp(logaddexp(t.dist[e.u], e.log_weight), t.dist[e.v]);
        if (approx > best + 1e-10 * std::max(1.0, std::abs(best))) continue;
        best = std::min(best, approx);
        all.push_back({approx, k, wind == 1});
    }
    const double limit = best + 1e-10 * std::max(1.0, std::abs(best));
    std::erase_if(all, [&](const TreeCandidate& c) { return c.approx > limit; });
    std::sort(all.begin(), all.end(), [](const TreeCandidate& a, const TreeCandidate& b) {
        return std::tie(a.approx, a.edge) < std::tie(b.approx, b.edge);
    });
    if (all.size() > cap) all.resize(cap);
    return all;
}

inline std::vector<VertexId> candidate_sequence(const ContourGraph& g, const ShortestPathTree& t,
                                                const TreeCandidate& c) {
    const Edge& e = g.edge(c.edge);
    const VertexId a = c.forward ? e.u : e.v;
    const VertexId b = c.forward ? e.v : e.u;
    std::vector<VertexId> seq = t.path_to(a);
    std::vector<VertexId> back = t.path_to(b);
    // Walk s -> a, then a -> b, then b -> s; the final return to s is implied.
    for (auto it = back.rbegin(); it != back.rend(); ++it) {
        if (std::next(it) == back.rend()) break;
        seq.push_back(*it);
    }
    return seq;
}

// Best canonical enclosing walk among a tree's near-minimal candidates.
inline std::optional<Walk> best_from_tree(const ContourGraph& g, const ShortestPathTree& t, std::size_t cap) {
    std::optional<Walk> best;
    for (const auto& c : enclosing_candidates(g, t, cap)) {
        Walk w = canonical_walk(g, candidate_sequence(g, t, c));
        if (w.winding != 1) continue;
        if (!best || walk_preferred(w, *best)) best = std::move(w);
    }
    return best;
}

inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace detail

/// Shortest enclosing walk over Provan's candidate set: for every source u and
/// edge vw, the walk P_{u,v} . vw . P_{w,u}; only winding +1 survives.
///
/// Sources are split across `threads` workers (0: hardware concurrency); the
/// result does not depend on the worker count.
inline Walk provan_sew(const ContourGraph& g, unsigned threads = 0) {
    const std::size_t nv = g.vertex_count();
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(detail::resolve_threads(threads),
                                                                         std::max<std::size_t>(nv, 1)));
    std::vector<std::optional<Walk>> partial(workers);
    auto work = [&](unsigned id) {
        for (std::size_t s = id; s < nv; s += workers) {
            const ShortestPathTree t = dijkstra_logsum(g, static_cast<VertexId>(s));
            auto w = detail::best_from_tree(g, t, 16);
            if (w && (!partial[id] || walk_preferred(*w, *partial[id]))) partial[id] = std::move(w);
        }
    };
    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        std::vector<std::exception_ptr> errors(workers);
        for (unsigned id = 0; id < workers; ++id) {
            pool.emplace_back([&, id] {
                try {
                    work(id);
                } catch (...) {
                    errors[id] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
    std::optional<Walk> best;
    for (auto& p : partial) {
        if (p && (!best || walk_preferred(*p, *best))) best = std::move(p);
    }
    if (!best) throw Error(ErrorCode::no_enclosing_walk, "provan_sew: no enclosing walk");
    return std::move(*best);
}

/// Vertex of minimum weight (smallest index among ties).
inline VertexId lightest_vertex(const ContourGraph& g) {
    if (g.vertex_count() == 0) throw Error(ErrorCode::no_enclosing_walk, "empty graph");
    VertexId best = 0;
    for (VertexId v = 1; v < g.vertex_count(); ++v) {
        if (g.vertex(v).log_weight < g.vertex(best).log_weight) best = v;
    }
    return best;
}

/// Provan's candidate set restricted to walks through the lightest vertex v*:
/// a single shortest-path tree. Spurs of the winning walk are trimmed.
inline Walk heuristic_sew(const ContourGraph& g) {
    const ShortestPathTree t = dijkstra_logsum(g, lightest_vertex(g));
    auto w = detail::best_from_tree(g, t, 64);
    if (!w) throw Error(ErrorCode::no_enclosing_walk, "heuristic_sew: no enclosing walk through v*");
    return std::move(*w);
}

inline constexpr std::size_t kExhaustiveMaxVertices = 16;

/// Minimum enclosing simple cycle by enumeration. Test oracle; |V| <= 16.
inline Walk exhaustive_sew(const ContourGraph& g) {
    const std::size_t nv = g.vertex_count();
    if (nv > kExhaustiveMaxVertices) {
        throw Error(ErrorCode::size_guard, "exhaustive_sew: more than 16 vertices");
    }
    std::optional<Walk> best;
    std::vector<VertexId> path;
    std::vector<char> on_path(nv, 0);

    // Simple cycles are enumerated from their smallest vertex s; a partial fold
    // is a prefix of the canonical fold, so it bounds the final weight.
    std::function<void(VertexId, VertexId, double)> dfs = [&](VertexId s, VertexId v, double acc) {
        if (best && acc > best->total_log_weight) return;
        for (const auto& nb : g.neighbors(v)) {
            const double next = logaddexp(acc, g.edge(nb.edge).log_weight);
            if (nb.vertex == s && path.size() >= 3) {
                std::vector<cplx> pts;
                for (VertexId x : path) pts.push_back(g.vertex(x).z);
                if (winding_number(pts) != 1) continue;
                Walk w = make_walk(g, path);
                if (!best || walk_preferred(w, *best)) best = std::move(w);
                continue;
            }
            if (nb.vertex <= s || on_path[nb.vertex]) continue;
            on_path[nb.vertex] = 1;
            path.push_back(nb.vertex);
            dfs(s, nb.vertex, next);
            path.pop_back();
            on_path[nb.vertex] = 0;
        }
    };
    for (VertexId s = 0; s < nv; ++s) {
        path.assign(1, s);
        on_path[s] = 1;
        dfs(s, s, -kInf);
        on_path[s] = 0;
    }
    if (!best) throw Error(ErrorCode::no_enclosing_walk, "exhaustive_sew: no enclosing walk");
    return std::move(*best);
}

enum class SewAlgorithm { provan, heuristic };

inline Walk shortest_enclosing_walk(const ContourGraph& g, SewAlgorithm algo, unsigned threads = 0) {
    return algo == SewAlgorithm::provan ? provan_sew(g, threads) : heuristic_sew(g);
}

}  // namespace optcontour
