#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "optcontour/analytic_function.hpp"
#include "optcontour/error.hpp"
#include "optcontour/log_value.hpp"

namespace optcontour {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

enum class EdgeKind { horizontal, vertical, diagonal, other };

/// A graph vertex. (i, j) are integer lattice coordinates in units of the
/// graph's current step; z is the embedded position.
struct Vertex {
    long i = 0;
    long j = 0;
    cplx z{};
    double log_weight = 0.0;
};

struct Edge {
    VertexId u = 0;
    VertexId v = 0;
    EdgeKind kind = EdgeKind::other;
    double log_weight = 0.0;
};

/// Square lattice cell [i, i+size] x [j, j+size] in units of the current step.
struct Cell {
    long i = 0;
    long j = 0;
    long size = 1;

    friend bool operator==(const Cell&, const Cell&) = default;
};

/// What produced a lattice graph; refinement needs it to weight new vertices.
struct WeightSource {
    std::shared_ptr<const AnalyticFunction> function;
    int order = 0;
};

/// d(z) = |z|^{-(n+1)} |f(z)| in log form. Non-finite where f is not evaluable or zero.
inline double vertex_log_weight(cplx z, int n, const AnalyticFunction& f) {
    const LogValue lf = f.eval_log(z);
    if (std::isnan(lf.re) || std::isnan(lf.im)) return kNaN;
    return -(n + 1.0) * std::log(std::abs(z)) + lf.re;
}

/// Two-node trapezoid |u-v|/2 (d(u) + d(v)) from endpoint log weights.
inline double edge_log_weight_from(cplx u, cplx v, double log_du, double log_dv) {
    if (!std::isfinite(log_du) || !std::isfinite(log_dv)) return kNaN;
    return std::log(0.5 * std::abs(u - v)) + logaddexp(log_du, log_dv);
}

inline double edge_log_weight(cplx u, cplx v, int n, const AnalyticFunction& f) {
    return edge_log_weight_from(u, v, vertex_log_weight(u, n, f), vertex_log_weight(v, n, f));
}

/// Embedded, weighted, undirected graph. Immutable once built.
class ContourGraph {
public:
    struct Neighbor {
        VertexId vertex;
        EdgeId edge;
    };

    ContourGraph() = default;

    ContourGraph(std::vector<Vertex> vertices, std::vector<Edge> edges, double step, double extent,
                 bool diagonals, std::vector<Cell> cells = {}, std::optional<WeightSource> source = {},
                 bool lattice = false)
        : vertices_(std::move(vertices)),
          edges_(std::move(edges)),
          cells_(std::move(cells)),
          source_(std::move(source)),
          step_(step),
          extent_(extent),
          diagonals_(diagonals),
          lattice_(lattice) {
        build_adjacency();
        if (lattice_) {
            for (VertexId k = 0; k < vertices_.size(); ++k) {
                index_.emplace(key(vertices_[k].i, vertices_[k].j), k);
            }
        }
    }

    const std::vector<Vertex>& vertices() const { return vertices_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<Cell>& cells() const { return cells_; }
    const Vertex& vertex(VertexId v) const { return vertices_[v]; }
    const Edge& edge(EdgeId e) const { return edges_[e]; }
    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    std::span<const Neighbor> neighbors(VertexId v) const {
        return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
    }

    std::optional<EdgeId> find_edge(VertexId a, VertexId b) const {
        for (const auto& nb : neighbors(a)) {
            if (nb.vertex == b) return nb.edge;
        }
        return std::nullopt;
    }

    std::optional<VertexId> vertex_at(long i, long j) const {
        auto it = index_.find(key(i, j));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    /// Current lattice step h.
    double step() const { return step_; }
    /// Side length l of the square domain.
    double extent() const { return extent_; }
    bool diagonals() const { return diagonals_; }
    bool is_lattice() const { return lattice_; }
    const std::optional<WeightSource>& source() const { return source_; }

    static std::int64_t key(long i, long j) {
        return (static_cast<std::int64_t>(i) << 32) ^ static_cast<std::int64_t>(static_cast<std::uint32_t>(j));
    }

private:
    void build_adjacency() {
        offsets_.assign(vertices_.size() + 1, 0);
        for (const auto& e : edges_) {
            ++offsets_[e.u + 1];
            ++offsets_[e.v + 1];
        }
        std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
        adjacency_.resize(offsets_.back());
        std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
        for (EdgeId k = 0; k < edges_.size(); ++k) {
            adjacency_[fill[edges_[k].u]++] = {edges_[k].v, k};
            adjacency_[fill[edges_[k].v]++] = {edges_[k].u, k};
        }
    }

    std::vector<Vertex> vertices_;
    std::vector<Edge> edges_;
    std::vector<Cell> cells_;
    std::optional<WeightSource> source_;
    std::vector<std::size_t> offsets_;
    std::vector<Neighbor> adjacency_;
    std::unordered_map<std::int64_t, VertexId> index_;
    double step_ = 1.0;
    double extent_ = 1.0;
    bool diagonals_ = false;
    bool lattice_ = false;
};

// ---------------------------------------------------------------------------
// Geometry against singular features

namespace geom {

inline double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }
inline double dot(cplx a, cplx b) { return a.real() * b.real() + a.imag() * b.imag(); }

inline double point_segment_distance(cplx p, cplx a, cplx b) {
    const cplx d = b - a;
    const double len2 = std::norm(d);
    if (len2 == 0.0) return std::abs(p - a);
    const double t = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
    return std::abs(p - (a + t * d));
}

// Distance from p to {anchor + t dir : 0 <= t <= t_max}; t_max may be +inf.
inline double point_ray_distance(cplx p, cplx anchor, cplx dir, double t_max) {
    const double t = std::clamp(dot(p - anchor, dir) / std::norm(dir), 0.0, t_max);
    return std::abs(p - (anchor + t * dir));
}

// Whether segment [a,b] meets {anchor + t dir : 0 <= t <= t_max} inflated by radius.
inline bool segment_hits_ray(cplx a, cplx b, cplx anchor, cplx dir, double t_max, double radius) {
    const cplx ab = b - a;
    const double denom = cross(dir, ab);
    if (denom != 0.0) {
        const double t = cross(a - anchor, ab) / denom;
        const double s = cross(a - anchor, dir) / denom;
        if (t >= 0.0 && t <= t_max && s >= 0.0 && s <= 1.0) return true;
    }
    double d = std::min(point_ray_distance(a, anchor, dir, t_max), point_ray_distance(b, anchor, dir, t_max));
    d = std::min(d, point_segment_distance(anchor, a, b));
    if (std::isfinite(t_max)) d = std::min(d, point_segment_distance(anchor + t_max * dir, a, b));
    return d <= radius;
}

}  // namespace geom

/// Exclusion radius for point features when the feature carries none: 1e-9 * l.
inline double default_point_exclusion(double extent) { return 1e-9 * extent; }

inline bool point_excluded(cplx p, const std::vector<SingularFeature>& features, double extent) {
    for (const auto& f : features) {
        switch (f.kind) {
            case FeatureKind::point:
                if (std::abs(p - f.anchor) <= std::max(f.exclusion_radius, default_point_exclusion(extent))) {
                    return true;
                }
                break;
            case FeatureKind::ray_cut:
                if (geom::point_ray_distance(p, f.anchor, f.direction, kInf) <= f.exclusion_radius) return true;
                break;
            case FeatureKind::segment_cut:
                if (geom::point_ray_distance(p, f.anchor, f.direction, f.length) <= f.exclusion_radius) {
                    return true;
                }
                break;
        }
    }
    return false;
}

inline bool segment_excluded(cplx a, cplx b, const std::vector<SingularFeature>& features, double extent) {
    for (const auto& f : features) {
        switch (f.kind) {
            case FeatureKind::point:
                if (geom::point_segment_distance(f.anchor, a, b) <=
                    std::max(f.exclusion_radius, default_point_exclusion(extent))) {
                    return true;
                }
                break;
            case FeatureKind::ray_cut:
                if (geom::segment_hits_ray(a, b, f.anchor, f.direction, kInf, f.exclusion_radius)) return true;
                break;
            case FeatureKind::segment_cut:
                if (geom::segment_hits_ray(a, b, f.anchor, f.direction, f.length, f.exclusion_radius)) return true;
                break;
        }
    }
    return false;
}

/// Numerical fallback for functions whose singularities are not fully declared:
/// an edge is rejected if f is not evaluable on it or its phase jumps.
inline bool edge_fails_probe(cplx a, cplx b, const AnalyticFunction& f) {
    constexpr int kSamples = 8;
    std::array<double, kSamples + 1> phase{};
    for (int k = 0; k <= kSamples; ++k) {
        const LogValue v = f.eval_log(a + (b - a) * (static_cast<double>(k) / kSamples));
        if (!v.finite()) return true;
        phase[k] = v.im;
    }
    std::array<double, kSamples> inc{};
    for (int k = 0; k < kSamples; ++k) inc[k] = std::abs(wrap_phase(phase[k + 1] - phase[k]));
    std::array<double, kSamples> sorted = inc;
    std::nth_element(sorted.begin(), sorted.begin() + kSamples / 2, sorted.end());
    const double median = sorted[kSamples / 2];
    const double worst = *std::max_element(inc.begin(), inc.end());
    return worst > 1.5 && worst > 3.0 * median;
}

/// Whether some cycle of g winds around 0. Every cycle is a sum of fundamental
/// cycles of a spanning forest, and winding is additive over that sum.
inline bool has_enclosing_cycle(const ContourGraph& g) {
    const std::size_t nv = g.vertex_count();
    std::vector<double> angle(nv, 0.0);
    std::vector<char> seen(nv, 0);
    std::vector<EdgeId> tree_edge(nv, static_cast<EdgeId>(-1));
    for (VertexId root = 0; root < nv; ++root) {
        if (seen[root]) continue;
        seen[root] = 1;
        std::queue<VertexId> q;
        q.push(root);
        while (!q.empty()) {
            const VertexId v = q.front();
            q.pop();
            for (const auto& nb : g.neighbors(v)) {
                const cplx zv = g.vertex(v).z;
                const cplx zw = g.vertex(nb.vertex).z;
                const double turn = std::arg(zw / zv);
                if (!seen[nb.vertex]) {
                    seen[nb.vertex] = 1;
                    angle[nb.vertex] = angle[v] + turn;
                    tree_edge[nb.vertex] = nb.edge;
                    q.push(nb.vertex);
                } else if (tree_edge[nb.vertex] != nb.edge && tree_edge[v] != nb.edge) {
                    const double total = angle[v] + turn - angle[nb.vertex];
                    if (std::lround(total / kTwoPi) != 0) return true;
                }
            }
        }
    }
    return false;
}

namespace detail {

inline EdgeKind edge_kind(long di, long dj) {
    if (dj == 0) return EdgeKind::horizontal;
    if (di == 0) return EdgeKind::vertical;
    if (std::abs(di) == std::abs(dj)) return EdgeKind::diagonal;
    return EdgeKind::other;
}

// Lattice segment through the origin (endpoints included).
inline bool passes_through_origin(long i1, long j1, long i2, long j2) {
    const long long c = static_cast<long long>(i1) * j2 - static_cast<long long>(j1) * i2;
    if (c != 0) return false;
    const long long d = static_cast<long long>(i1) * i2 + static_cast<long long>(j1) * j2;
    return d <= 0;
}

/// Builds the graph spanned by the sides (and optionally diagonals) of the
/// given cells. Known log weights are reused by lattice key; others are computed.
inline ContourGraph assemble_lattice(std::vector<Cell> cells, double step, double extent, bool diagonals,
                                     const WeightSource& source,
                                     const std::unordered_map<std::int64_t, double>& known = {}) {
    const AnalyticFunction& f = *source.function;
    const auto& features = f.singularities();
    const bool probe = f.detect_by_evaluation();

    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        return std::tie(a.i, a.j, a.size) < std::tie(b.i, b.j, b.size);
    });
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());

    std::vector<std::pair<long, long>> corners;
    corners.reserve(cells.size() * 4);
    for (const auto& c : cells) {
        corners.emplace_back(c.i, c.j);
        corners.emplace_back(c.i + c.size, c.j);
        corners.emplace_back(c.i, c.j + c.size);
        corners.emplace_back(c.i + c.size, c.j + c.size);
    }
    std::sort(corners.begin(), corners.end());
    corners.erase(std::unique(corners.begin(), corners.end()), corners.end());

    std::vector<Vertex> vertices;
    std::unordered_map<std::int64_t, VertexId> index;
    vertices.reserve(corners.size());
    for (const auto& [i, j] : corners) {
        if (i == 0 && j == 0) continue;
        const cplx z(static_cast<double>(i) * step, static_cast<double>(j) * step);
        double lw;
        if (auto it = known.find(ContourGraph::key(i, j)); it != known.end()) {
            lw = it->second;
        } else {
            lw = vertex_log_weight(z, source.order, f);
        }
        if (!std::isfinite(lw)) continue;
        if (point_excluded(z, features, extent)) continue;
        index.emplace(ContourGraph::key(i, j), static_cast<VertexId>(vertices.size()));
        vertices.push_back({i, j, z, lw});
    }

    std::vector<Edge> edges;
    std::unordered_set<std::uint64_t> seen;
    auto try_edge = [&](long i1, long j1, long i2, long j2) {
        auto a = index.find(ContourGraph::key(i1, j1));
        auto b = index.find(ContourGraph::key(i2, j2));
        if (a == index.end() || b == index.end()) return;
        VertexId u = a->second, v = b->second;
        if (u > v) std::swap(u, v);
        const std::uint64_t k = (static_cast<std::uint64_t>(u) << 32) | v;
        if (!seen.insert(k).second) return;
        if (passes_through_origin(i1, j1, i2, j2)) return;
        const Vertex& vu = vertices[u];
        const Vertex& vv = vertices[v];
        if (segment_excluded(vu.z, vv.z, features, extent)) return;
        if (probe && edge_fails_probe(vu.z, vv.z, f)) return;
        const double lw = edge_log_weight_from(vu.z, vv.z, vu.log_weight, vv.log_weight);
        if (!std::isfinite(lw)) return;
        edges.push_back({u, v, edge_kind(vv.i - vu.i, vv.j - vu.j), lw});
    };
    for (const auto& c : cells) {
        const long i0 = c.i, j0 = c.j, i1 = c.i + c.size, j1 = c.j + c.size;
        try_edge(i0, j0, i1, j0);
        try_edge(i1, j0, i1, j1);
        try_edge(i0, j1, i1, j1);
        try_edge(i0, j0, i0, j1);
        if (diagonals) {
            try_edge(i0, j0, i1, j1);
            try_edge(i1, j0, i0, j1);
        }
    }
    std::sort(edges.begin(), edges.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
    return ContourGraph(std::move(vertices), std::move(edges), step, extent, diagonals, std::move(cells),
                        source, true);
}

}  // namespace detail

/// Square grid of m x m vertices with step h = l/(m-1), centred at 0.
///
/// The origin vertex, vertices where the weight is not finite and vertices
/// inside singular features are dropped, as are edges touching a dropped
/// vertex, meeting a feature, or running through the origin.
inline ContourGraph build_grid(std::shared_ptr<const AnalyticFunction> f, int n, double l, int m, bool diagonals) {
    if (m < 3 || m % 2 == 0) throw Error(ErrorCode::invalid_argument, "build_grid: m must be odd and >= 3");
    if (!(l > 0.0)) throw Error(ErrorCode::invalid_argument, "build_grid: l must be positive");
    if (n < 0) throw Error(ErrorCode::invalid_argument, "build_grid: order must be non-negative");
    const long half = (m - 1) / 2;
    const double step = l / (m - 1);
    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(m - 1) * (m - 1));
    for (long i = -half; i < half; ++i) {
        for (long j = -half; j < half; ++j) cells.push_back({i, j, 1});
    }
    ContourGraph g = detail::assemble_lattice(std::move(cells), step, l, diagonals, WeightSource{std::move(f), n});
    if (!has_enclosing_cycle(g)) {
        throw Error(ErrorCode::no_enclosing_walk, "build_grid: no enclosing cycle exists around the origin");
    }
    return g;
}

inline ContourGraph build_grid(const AnalyticFunction& f, int n, double l, int m, bool diagonals) {
    return build_grid(std::make_shared<const AnalyticFunction>(f), n, l, m, diagonals);
}

}  // namespace optcontour
