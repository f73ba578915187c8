#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "optcontour/grid.hpp"

using namespace optcontour;
using Catch::Approx;

namespace {

std::shared_ptr<const AnalyticFunction> fn(std::string_view text) {
    return std::make_shared<const AnalyticFunction>(AnalyticFunction::parse(text));
}

// Sum (in linear space) of the edges lying on the outer boundary square.
double outer_ring_weight(const ContourGraph& g, long half) {
    double total = -kInf;
    for (const auto& e : g.edges()) {
        const Vertex& a = g.vertex(e.u);
        const Vertex& b = g.vertex(e.v);
        const bool on_x = (std::abs(a.i) == half && a.i == b.i);
        const bool on_y = (std::abs(a.j) == half && a.j == b.j);
        if (on_x || on_y) total = logaddexp(total, e.log_weight);
    }
    return std::exp(total);
}

}  // namespace

TEST_CASE("vertex_log_weight", "[grid][weights]") {
    CHECK(vertex_log_weight(1.0, 0, AnalyticFunction::parse("exp(z)")) == Approx(1.0).epsilon(1e-15));
    CHECK(vertex_log_weight({0.0, 2.0}, 2, AnalyticFunction::parse("1")) ==
          Approx(-3.0 * std::log(2.0)).epsilon(1e-15));
    CHECK(vertex_log_weight(300.0, 300, AnalyticFunction::parse("exp(z)")) ==
          Approx(-301.0 * std::log(300.0) + 300.0).epsilon(1e-14));
    CHECK(vertex_log_weight(300.0, 300, AnalyticFunction::parse("exp(z)")) == Approx(-1416.8385).margin(1e-4));
    CHECK_FALSE(std::isfinite(vertex_log_weight(2.0, 3, AnalyticFunction::parse("(1-z)^(11/2)"))));
}

TEST_CASE("edge_log_weight", "[grid][weights]") {
    const AnalyticFunction one = AnalyticFunction::parse("1");
    CHECK(edge_log_weight(1.0, {1.0, 0.1}, 0, one) ==
          Approx(std::log(0.05) + logaddexp(0.0, -0.5 * std::log(1.01))).epsilon(1e-15));
    CHECK(edge_log_weight_from(0.0, {0.0, 3.0}, 2.0, 2.0) == Approx(std::log(3.0) + 2.0).epsilon(1e-15));
    CHECK(edge_log_weight({1.0, 1.0}, {0.0, 1.0}, 0, one) ==
          Approx(std::log(0.5 * (1.0 / std::numbers::sqrt2 + 1.0))).epsilon(1e-15));
    const AnalyticFunction c = AnalyticFunction::parse("(1-z)^(11/2)*exp(3*z)");
    const cplx u(0.3, -0.7), v(-0.2, 0.45);
    CHECK(edge_log_weight(u, v, 7, c) == edge_log_weight(v, u, 7, c));
    CHECK_FALSE(std::isfinite(edge_log_weight(0.5, 1.5, 0, AnalyticFunction::parse("log(1-z)"))));
}

TEST_CASE("build_grid counts on a 3x3 grid", "[grid]") {
    SECTION("no diagonals") {
        const ContourGraph g = build_grid(fn("1"), 0, 2.0, 3, false);
        CHECK(g.vertex_count() == 8);
        CHECK(g.edge_count() == 8);
        CHECK(g.step() == 1.0);
        CHECK(g.extent() == 2.0);
    }
    SECTION("diagonals") {
        const ContourGraph g = build_grid(fn("1"), 0, 2.0, 3, true);
        CHECK(g.vertex_count() == 8);
        CHECK(g.edge_count() == 12);
        int diag = 0;
        for (const auto& e : g.edges()) diag += e.kind == EdgeKind::diagonal;
        CHECK(diag == 4);
    }
}

TEST_CASE("build_grid invariants", "[grid]") {
    for (const bool diag : {false, true}) {
        const std::pair<const char*, double> cases[] = {
            {"exp(z)", 0.0},
            {"(1-z)^(11/2)", 0.0},
            {"exp(1/(1+8*z)^(1/5))*(1-z)^(11/2)*besselj0(z)", std::numbers::sqrt2 / 2},
        };
        for (const auto& [text, z0] : cases) {
            const int m = 21;
            auto f = std::make_shared<const AnalyticFunction>(AnalyticFunction::parse(text).shifted(z0));
            const ContourGraph g = build_grid(f, 10, 4.0, m, diag);
            INFO(text << " diagonals=" << diag);
            CHECK(g.vertex_count() <= static_cast<std::size_t>(m * m));
            CHECK(g.edge_count() <= static_cast<std::size_t>(4 * m * m));
            CHECK(g.step() == Approx(4.0 / (m - 1)));
            for (const auto& v : g.vertices()) {
                CHECK_FALSE((v.i == 0 && v.j == 0));
                CHECK(std::isfinite(v.log_weight));
            }
            for (const auto& e : g.edges()) {
                const Vertex& a = g.vertex(e.u);
                const Vertex& b = g.vertex(e.v);
                const long di = std::abs(a.i - b.i), dj = std::abs(a.j - b.j);
                const bool axis = (di + dj == 1);
                const bool diagonal = diag && di == 1 && dj == 1;
                CHECK((axis || diagonal));
                CHECK(std::isfinite(e.log_weight));
                CHECK(e.log_weight == edge_log_weight_from(a.z, b.z, a.log_weight, b.log_weight));
            }
        }
    }
}

TEST_CASE("branch cut is an obstacle", "[grid][cut]") {
    const ContourGraph g = build_grid(fn("(1-z)^(11/2)"), 10, 4.0, 41, true);
    for (const auto& e : g.edges()) {
        const cplx a = g.vertex(e.u).z, b = g.vertex(e.v).z;
        if ((a.imag() > 0) != (b.imag() > 0) || a.imag() == 0.0 || b.imag() == 0.0) {
            // Where the segment meets the real axis.
            const double t = a.imag() == b.imag() ? 0.0 : a.imag() / (a.imag() - b.imag());
            const double x = a.real() + t * (b.real() - a.real());
            if (a.imag() * b.imag() <= 0.0) CHECK(x < 1.0);
        }
    }
}

TEST_CASE("no enclosing cycle is reported", "[grid][errors]") {
    try {
        build_grid(fn("log(z)"), 0, 2.0, 11, true);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::no_enclosing_walk);
    }
    CHECK_THROWS_AS(build_grid(fn("1"), 0, 2.0, 4, true), Error);
    CHECK_THROWS_AS(build_grid(fn("1"), 0, -1.0, 5, true), Error);
}

TEST_CASE("weights of an even function are centrally symmetric", "[grid][property]") {
    const ContourGraph g = build_grid(fn("exp(z^2)*cos(z)"), 6, 3.0, 15, true);
    for (const auto& v : g.vertices()) {
        const auto mirror = g.vertex_at(-v.i, -v.j);
        REQUIRE(mirror);
        const double w = g.vertex(*mirror).log_weight;
        CHECK(std::abs(w - v.log_weight) <= 4 * 2.22e-16 * std::max(1.0, std::abs(w)));
    }
}

TEST_CASE("trapezoid ring weight converges at second order", "[grid][property]") {
    // f = 1, n = 0 on the boundary of [-1,1]^2: the exact arclength integral of
    // 1/|z| is 8 asinh(1).
    const double exact = 8.0 * std::asinh(1.0);
    double err[3];
    int k = 0;
    for (const int m : {9, 17, 33}) {
        const ContourGraph g = build_grid(fn("1"), 0, 2.0, m, false);
        err[k++] = std::abs(outer_ring_weight(g, (m - 1) / 2) - exact);
    }
    const double order1 = std::log2(err[0] / err[1]);
    const double order2 = std::log2(err[1] / err[2]);
    CHECK(order1 >= 1.9);
    CHECK(order2 >= 1.9);
}

TEST_CASE("has_enclosing_cycle", "[grid]") {
    const ContourGraph g = build_grid(fn("1"), 0, 2.0, 3, false);
    CHECK(has_enclosing_cycle(g));
    // A path that does not close around the origin.
    std::vector<Vertex> vs = {{1, 0, {1.0, 0.0}, 0.0}, {1, 1, {1.0, 1.0}, 0.0}, {0, 1, {0.0, 1.0}, 0.0}};
    std::vector<Edge> es = {{0, 1, EdgeKind::vertical, 0.0}, {1, 2, EdgeKind::horizontal, 0.0},
                            {0, 2, EdgeKind::diagonal, 0.0}};
    CHECK_FALSE(has_enclosing_cycle(ContourGraph(vs, es, 1.0, 2.0, true)));
}
