#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "optcontour/sew.hpp"

using namespace optcontour;
using Catch::Approx;

namespace {

std::shared_ptr<const AnalyticFunction> fn(std::string_view text) {
    return std::make_shared<const AnalyticFunction>(AnalyticFunction::parse(text));
}

// k x k unit lattice shifted so the origin lies strictly inside a cell, with
// independent random edge log weights.
ContourGraph random_lattice(int k, std::mt19937_64& rng, bool diagonals) {
    std::uniform_real_distribution<double> w(-3.0, 3.0);
    std::vector<Vertex> vs;
    const double ox = (k - 1) / 2.0 - 0.37, oy = (k - 1) / 2.0 - 0.21;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) vs.push_back({i, j, {i - ox, j - oy}, 0.0});
    }
    auto id = [k](int i, int j) { return static_cast<VertexId>(i * k + j); };
    std::vector<Edge> es;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            if (i + 1 < k) es.push_back({id(i, j), id(i + 1, j), EdgeKind::horizontal, w(rng)});
            if (j + 1 < k) es.push_back({id(i, j), id(i, j + 1), EdgeKind::vertical, w(rng)});
            if (diagonals && i + 1 < k && j + 1 < k) {
                es.push_back({id(i, j), id(i + 1, j + 1), EdgeKind::diagonal, w(rng)});
                es.push_back({id(i + 1, j), id(i, j + 1), EdgeKind::diagonal, w(rng)});
            }
        }
    }
    return ContourGraph(std::move(vs), std::move(es), 1.0, k - 1.0, diagonals);
}

void check_walk_consistent(const ContourGraph& g, const Walk& w) {
    REQUIRE(w.size() >= 3);
    CHECK(w.winding == 1);
    CHECK(winding_number(w) == 1);
    double fold = -kInf;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const auto e = g.find_edge(w.vertices[k], w.vertices[(k + 1) % w.size()]);
        REQUIRE(e);
        fold = logaddexp(fold, g.edge(*e).log_weight);
    }
    CHECK(std::abs(fold - w.total_log_weight) <= 4 * 2.22e-16 * std::max(1.0, std::abs(fold)));
}

}  // namespace

TEST_CASE("dijkstra in the log-sum semiring", "[sew][dijkstra]") {
    SECTION("path graph") {
        std::vector<Vertex> vs = {{0, 0, {1.0, 0.0}, 0.0}, {1, 0, {2.0, 0.0}, 0.0}, {2, 0, {3.0, 0.0}, 0.0}};
        std::vector<Edge> es = {{0, 1, EdgeKind::horizontal, 0.0}, {1, 2, EdgeKind::horizontal, std::log(3.0)}};
        const ContourGraph g(vs, es, 1.0, 1.0, false);
        const auto t = dijkstra_logsum(g, 0);
        CHECK(t.dist[0] == -kInf);
        CHECK(t.dist[2] == Approx(std::log(4.0)).epsilon(1e-15));
        CHECK(t.path_to(2) == std::vector<VertexId>{0, 1, 2});
    }
    SECTION("4-cycle picks the light route") {
        std::vector<Vertex> vs = {
            {1, 0, {1.0, 0.0}, 0.0}, {0, 1, {0.0, 1.0}, 0.0}, {-1, 0, {-1.0, 0.0}, 0.0}, {0, -1, {0.0, -1.0}, 0.0}};
        std::vector<Edge> es = {{0, 1, EdgeKind::other, 0.0},
                                {1, 2, EdgeKind::other, 0.0},
                                {2, 3, EdgeKind::other, std::log(10.0)},
                                {3, 0, EdgeKind::other, std::log(10.0)}};
        const ContourGraph g(vs, es, 1.0, 2.0, false);
        const auto t = dijkstra_logsum(g, 0);
        CHECK(t.dist[2] == Approx(std::log(2.0)).epsilon(1e-15));
        CHECK(std::exp(t.dist[3]) == Approx(10.0).epsilon(1e-14));
    }
    SECTION("unreachable vertices") {
        std::vector<Vertex> vs = {{1, 0, {1.0, 0.0}, 0.0}, {2, 0, {2.0, 0.0}, 0.0}};
        const ContourGraph g(vs, {}, 1.0, 1.0, false);
        CHECK(dijkstra_logsum(g, 0).dist[1] == kInf);
        CHECK_THROWS_AS(dijkstra_logsum(g, 5), Error);
    }
    SECTION("triangle inequality") {
        std::mt19937_64 rng(7);
        const ContourGraph g = random_lattice(6, rng, true);
        const auto t = dijkstra_logsum(g, 3);
        for (const auto& e : g.edges()) {
            CHECK(t.dist[e.v] <= logaddexp(t.dist[e.u], e.log_weight) + 1e-14);
            CHECK(t.dist[e.u] <= logaddexp(t.dist[e.v], e.log_weight) + 1e-14);
        }
    }
}

TEST_CASE("winding_number", "[sew][winding]") {
    const double h = 0.5;
    std::vector<cplx> sq = {{h, h}, {-h, h}, {-h, -h}, {h, -h}};
    CHECK(winding_number(sq) == 1);
    std::vector<cplx> rev(sq.rbegin(), sq.rend());
    CHECK(winding_number(rev) == -1);
    std::vector<cplx> away;
    for (auto z : sq) away.push_back(z + cplx(3 * h, 3 * h));
    CHECK(winding_number(away) == 0);
    // Backtrack u -> v -> u contributes nothing.
    std::vector<cplx> spur = {{h, h}, {-h, h}, {-2 * h, h}, {-h, h}, {-h, -h}, {h, -h}};
    CHECK(winding_number(spur) == 1);
}

TEST_CASE("spur trimming and canonical rotation", "[sew]") {
    CHECK(trim_spurs({5, 1, 2, 7, 2, 3, 4}) == std::vector<VertexId>{5, 1, 2, 3, 4});
    CHECK(trim_spurs({9, 1, 2, 3, 1}) == std::vector<VertexId>{1, 2, 3});
    CHECK(trim_spurs({1, 2, 3, 4, 8, 4}) == std::vector<VertexId>{1, 2, 3, 4});
    CHECK(trim_spurs({8, 7, 1, 2, 3, 7}) == std::vector<VertexId>{7, 1, 2, 3});
    CHECK(canonical_rotation({4, 2, 9, 3}) == std::vector<VertexId>{2, 9, 3, 4});
}

TEST_CASE("ring on the 3x3 grid", "[sew]") {
    const ContourGraph g = build_grid(fn("1"), 0, 2.0, 3, false);
    const double expected = std::log(4.0 + 2.0 * std::numbers::sqrt2);
    const Walk p = provan_sew(g);
    const Walk h = heuristic_sew(g);
    const Walk x = exhaustive_sew(g);
    CHECK(p.size() == 8);
    CHECK(p.total_log_weight == Approx(expected).epsilon(1e-15));
    CHECK(x.total_log_weight == p.total_log_weight);
    CHECK(h.vertices == p.vertices);
    CHECK(x.vertices == p.vertices);
    check_walk_consistent(g, p);
}

TEST_CASE("no enclosing walk", "[sew][errors]") {
    std::vector<Vertex> vs = {{3, 3, {3.0, 3.0}, 0.0}, {4, 3, {4.0, 3.0}, 0.0}, {4, 4, {4.0, 4.0}, 0.0},
                              {3, 4, {3.0, 4.0}, 0.0}};
    std::vector<Edge> es = {{0, 1, EdgeKind::horizontal, 0.0},
                            {1, 2, EdgeKind::vertical, 0.0},
                            {2, 3, EdgeKind::horizontal, 0.0},
                            {0, 3, EdgeKind::vertical, 0.0}};
    const ContourGraph g(vs, es, 1.0, 1.0, false);
    for (auto* f : {+[](const ContourGraph& gr) { return provan_sew(gr); },
                    +[](const ContourGraph& gr) { return heuristic_sew(gr); },
                    +[](const ContourGraph& gr) { return exhaustive_sew(gr); }}) {
        try {
            f(g);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::no_enclosing_walk);
        }
    }
}

TEST_CASE("single 4-cycle around the origin", "[sew]") {
    std::vector<Vertex> vs = {
        {1, 0, {1.0, 0.0}, 0.0}, {0, 1, {0.0, 1.0}, 0.0}, {-1, 0, {-1.0, 0.0}, 0.0}, {0, -1, {0.0, -1.0}, 0.0}};
    std::vector<Edge> es = {{0, 1, EdgeKind::other, 0.3},
                            {1, 2, EdgeKind::other, -0.2},
                            {2, 3, EdgeKind::other, 1.0},
                            {0, 3, EdgeKind::other, 0.0}};
    const ContourGraph g(vs, es, 1.0, 2.0, false);
    const Walk x = exhaustive_sew(g);
    CHECK(x.vertices == std::vector<VertexId>{0, 1, 2, 3});
    CHECK(provan_sew(g).vertices == x.vertices);
}

TEST_CASE("nested rings: the cheaper inner ring wins", "[sew]") {
    // Inner diamond of radius 1, outer octagon of radius 2, joined by spokes.
    std::vector<Vertex> vs;
    for (int k = 0; k < 4; ++k) vs.push_back({k, 0, std::polar(1.0, k * std::numbers::pi / 2), 0.0});
    for (int k = 0; k < 8; ++k) vs.push_back({k, 1, std::polar(2.0, k * std::numbers::pi / 4), 0.0});
    std::vector<Edge> es;
    for (VertexId k = 0; k < 4; ++k) es.push_back({k, (k + 1) % 4, EdgeKind::other, 0.1});
    for (VertexId k = 0; k < 8; ++k) es.push_back({4 + k, 4 + (k + 1) % 8, EdgeKind::other, 0.5});
    for (VertexId k = 0; k < 4; ++k) es.push_back({k, 4 + 2 * k, EdgeKind::other, 0.2});
    const ContourGraph g(vs, es, 1.0, 4.0, false);
    const Walk x = exhaustive_sew(g);
    CHECK(x.vertices == std::vector<VertexId>{0, 1, 2, 3});
    CHECK(x.total_log_weight == Approx(0.1 + std::log(4.0)).epsilon(1e-15));
    CHECK(provan_sew(g).vertices == x.vertices);
    CHECK(heuristic_sew(g).total_log_weight == x.total_log_weight);
}

TEST_CASE("5x5 grid of f = 1 picks the inner ring", "[sew]") {
    const ContourGraph full = build_grid(fn("1"), 0, 4.0, 5, false);
    const Walk p = provan_sew(full);
    CHECK(p.size() == 8);
    for (VertexId v : p.vertices) {
        CHECK(std::max(std::abs(full.vertex(v).i), std::abs(full.vertex(v).j)) == 1);
    }
    CHECK(p.total_log_weight == Approx(std::log(4.0 + 2.0 * std::numbers::sqrt2)).epsilon(1e-14));
    try {
        exhaustive_sew(full);
        FAIL("expected the size guard");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::size_guard);
    }
}

TEST_CASE("provan matches the exhaustive oracle on random lattices", "[sew][oracle]") {
    std::mt19937_64 rng(1234);
    int trials = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 2 + trial % 3;  // 2x2, 3x3, 4x4
        const bool diag = (trial / 3) % 2 == 1;
        const ContourGraph g = random_lattice(k, rng, diag);
        if (!has_enclosing_cycle(g)) continue;
        ++trials;
        const Walk x = exhaustive_sew(g);
        const Walk p = provan_sew(g);
        INFO("trial " << trial);
        CHECK(p.total_log_weight == x.total_log_weight);
        CHECK(p.vertices == x.vertices);
        check_walk_consistent(g, p);
        const Walk h = heuristic_sew(g);
        CHECK(p.total_log_weight <= h.total_log_weight);
        CHECK(h.winding == 1);
    }
    CHECK(trials >= 60);
}

TEST_CASE("heuristic agrees with provan on exp", "[sew]") {
    const ContourGraph g = build_grid(fn("exp(z)"), 4, 12.0, 11, true);
    const Walk p = provan_sew(g);
    const Walk h = heuristic_sew(g);
    CHECK(std::abs(h.total_log_weight - p.total_log_weight) <= 1e-6 * std::abs(p.total_log_weight));
    check_walk_consistent(g, p);
    check_walk_consistent(g, h);
}

TEST_CASE("worker count does not change the result", "[sew][concurrency]") {
    const ContourGraph g = build_grid(fn("(1-z)^(11/2)"), 10, 3.0, 21, true);
    const Walk a = provan_sew(g, 1);
    const Walk b = provan_sew(g, 4);
    CHECK(a.vertices == b.vertices);
    CHECK(a.total_log_weight == b.total_log_weight);
}

TEST_CASE("scaling f by a constant keeps the walk", "[sew][property]") {
    const ContourGraph g1 = build_grid(fn("(1-z)^(11/2)*exp(z)"), 10, 3.0, 15, true);
    const ContourGraph g2 = build_grid(fn("1e7*(1-z)^(11/2)*exp(z)"), 10, 3.0, 15, true);
    const Walk a = provan_sew(g1);
    const Walk b = provan_sew(g2);
    CHECK(a.vertices == b.vertices);
    CHECK(b.total_log_weight - a.total_log_weight == Approx(std::log(1e7)).epsilon(1e-12));
    CHECK(heuristic_sew(g1).vertices == heuristic_sew(g2).vertices);
}
