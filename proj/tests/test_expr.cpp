#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "optcontour/analytic_function.hpp"
#include "optcontour/expr.hpp"

using namespace optcontour;
using Catch::Approx;

namespace {

cplx direct(std::string_view text, cplx z) { return parse(text).eval_direct(z); }

LogValue logv(std::string_view text, cplx z) { return AnalyticFunction::parse(text).eval_log(z); }

ErrorCode parse_error_code(std::string_view text) {
    try {
        parse(text);
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::invalid_argument;
}

}  // namespace

TEST_CASE("parse evaluates simple expressions", "[expr][parse]") {
    CHECK(direct("z^2", 3.0) == cplx(9.0, 0.0));
    CHECK(direct("(1-z)^(11/2)", 0.0) == cplx(1.0, 0.0));
    CHECK(std::abs(direct("exp(z)", {0.0, std::numbers::pi}) - cplx(-1.0, 0.0)) < 4 * 2.3e-16);
    CHECK(direct("2+3*4", 0.0) == cplx(14.0, 0.0));
    CHECK(direct("2^3^2", 0.0) == cplx(512.0, 0.0));
    CHECK(direct("-2^2", 0.0) == cplx(-4.0, 0.0));
    CHECK(direct("2^-1", 0.0) == cplx(0.5, 0.0));
    CHECK(direct("3i*z", 2.0) == cplx(0.0, 6.0));
    CHECK(direct("8z+1", 0.5) == cplx(5.0, 0.0));
    CHECK(direct("1.5e2", 0.0) == cplx(150.0, 0.0));
    CHECK(direct("rgamma(z)", 1.0).real() == Approx(1.0).epsilon(1e-14));
    CHECK(direct("gamma(z)", 5.0).real() == Approx(24.0).epsilon(1e-13));
}

TEST_CASE("parse errors carry codes and offsets", "[expr][parse]") {
    CHECK(parse_error_code("") == ErrorCode::syntax);
    CHECK(parse_error_code("   ") == ErrorCode::syntax);
    CHECK(parse_error_code("(1+z") == ErrorCode::syntax);
    CHECK(parse_error_code("1+z)") == ErrorCode::syntax);
    CHECK(parse_error_code("foo(z)") == ErrorCode::unknown_function);
    CHECK(parse_error_code("exp()") == ErrorCode::syntax);
    CHECK(parse_error_code("z +* 2") == ErrorCode::syntax);
    try {
        parse("1 + $");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
        CHECK(std::string(e.what()).find("offset 4") != std::string::npos);
    }
}

TEST_CASE("unparse round trip is structurally stable", "[expr][parse]") {
    const std::vector<std::string> inputs = {
        "z^2",
        "(1-z)^(11/2)",
        "exp(1/(1+8*z)^(1/5))*(1-z)^(11/2)*besselj0(z)",
        "-z^2 + 3.25e-7*z - 2i",
        "1/gamma(z)",
        "sqrt(1+z)*log(2-z)/cos(z) - sin(0.1)",
        "2^3^z",
        "0.1+0.2*z",
    };
    for (const auto& text : inputs) {
        const Expression a = parse(text);
        const Expression b = parse(a.unparse());
        INFO(text << " -> " << a.unparse());
        CHECK(structurally_equal(a.root(), b.root()));
        CHECK(b.unparse() == a.unparse());
    }
}

TEST_CASE("eval_log examples", "[expr][eval]") {
    const LogValue e = logv("exp(z)", {100.0, 3.0});
    CHECK(e.re == Approx(100.0).epsilon(1e-15));
    CHECK(e.im == Approx(3.0).epsilon(1e-15));

    const LogValue g = logv("1/gamma(z)", 1.0);
    CHECK(std::abs(g.re) < 1e-14);
    CHECK(std::abs(g.im) < 1e-14);

    const LogValue c = logv("(1-z)^(11/2)", 1.0);
    CHECK(c.re == -kInf);

    SECTION("values beyond hardware range") {
        const LogValue big = logv("exp(z)^3", 400.0);
        CHECK(big.re == Approx(1200.0).epsilon(1e-14));
        const LogValue tiny = logv("z^(-301)", 300.0);
        CHECK(tiny.re == Approx(-301.0 * std::log(300.0)).epsilon(1e-14));
        const LogValue rg = logv("rgamma(z)", 301.0);
        CHECK(rg.re == Approx(-614.485803043773475512806766146 * std::log(10.0)).epsilon(1e-14));
    }
    SECTION("non-evaluable points") {
        CHECK_FALSE(logv("(1-z)^(11/2)", 2.0).finite());
        CHECK_FALSE(logv("log(z)", -1.0).finite());
        CHECK_FALSE(logv("sqrt(z)", 0.0).finite());
        CHECK_FALSE(logv("1/z", 0.0).finite());
        CHECK_FALSE(logv("gamma(z)", -3.0).finite());
        CHECK(logv("rgamma(z)", -3.0).is_zero());
        CHECK_FALSE(logv("besselj0(z)", 40.0).finite());
    }
    SECTION("principal branch for fractional powers") {
        const LogValue s = logv("z^(1/2)", {-1.0, 1e-9});
        CHECK(std::abs(s.exp() - std::sqrt(cplx(-1.0, 1e-9))) < 1e-15);
        const LogValue t = logv("z^(1/2)", {-1.0, -1e-9});
        CHECK(std::abs(t.exp() - std::sqrt(cplx(-1.0, -1e-9))) < 1e-15);
    }
}

TEST_CASE("log evaluation agrees with direct evaluation", "[expr][eval][property]") {
    const std::vector<std::string> inputs = {
        "exp(z)", "z^3 - 2*z + 1", "(1-z)^(11/2)", "1/gamma(z)", "rgamma(z)",
        "besselj0(z)", "exp(1/(1+8*z)^(1/5))*(1-z)^(11/2)*besselj0(z)",
        "sqrt(2+z)*log(3-z)", "sin(z)/cos(z)", "1/(z^2+4)",
    };
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    for (const auto& text : inputs) {
        const AnalyticFunction f = AnalyticFunction::parse(text);
        int checked = 0;
        for (int k = 0; k < 1000; ++k) {
            const cplx z(coord(rng), coord(rng));
            const LogValue lv = f.eval_log(z);
            const cplx d = *f.eval_direct(z);
            if (!lv.finite() || !std::isfinite(std::abs(d)) || std::abs(d) == 0.0) continue;
            // Keep away from declared features: the principal branch of a power
            // is not continuous there.
            bool near_feature = false;
            for (const auto& s : f.singularities()) {
                if (s.kind == FeatureKind::point && std::abs(z - s.anchor) < 1e-3) near_feature = true;
                if (s.kind == FeatureKind::ray_cut) {
                    const cplx rel = (z - s.anchor) / s.direction;
                    if (rel.real() > 0.0 && std::abs(rel.imag()) < 1e-3) near_feature = true;
                }
            }
            if (near_feature) continue;
            ++checked;
            INFO(text << " at " << z);
            // Special functions carry their own rounding; compositions of
            // elementary operations are held to a few ulps.
            const double tol = text.find("gamma") != std::string::npos || text.find("bessel") != std::string::npos
                                   ? 1e-12
                                   : 64 * 2.22e-16;
            CHECK(std::abs(lv.exp() - d) <= tol * std::abs(d));
            CHECK(std::abs(lv.re - std::log(std::abs(d))) <= tol * std::max(1.0, std::abs(lv.re)));
        }
        CHECK(checked > 500);
    }
}

TEST_CASE("singular structure from the tree", "[expr][structure]") {
    SECTION("power of an affine base") {
        const auto s = singular_structure(parse("(1-z)^(11/2)"));
        REQUIRE(s.features.size() == 1);
        CHECK_FALSE(s.detect_by_evaluation);
        CHECK(s.features[0].kind == FeatureKind::ray_cut);
        CHECK(std::abs(s.features[0].anchor - cplx(1.0, 0.0)) < 1e-15);
        CHECK(std::abs(s.features[0].direction - cplx(1.0, 0.0)) < 1e-15);
    }
    SECTION("entire") {
        const auto s = singular_structure(parse("exp(z)"));
        CHECK(s.features.empty());
        CHECK_FALSE(s.detect_by_evaluation);
        CHECK(singular_structure(parse("1/gamma(z)")).features.empty());
        CHECK(singular_structure(parse("rgamma(z)*besselj0(z)")).features.empty());
    }
    SECTION("essential singularity at a branch point") {
        const auto s = singular_structure(parse("exp(1/(1+8*z)^(1/5))"));
        CHECK_FALSE(s.detect_by_evaluation);
        bool ray = false, point = false;
        for (const auto& f : s.features) {
            if (f.kind == FeatureKind::ray_cut) {
                ray = true;
                CHECK(std::abs(f.anchor - cplx(-0.125, 0.0)) < 1e-15);
                CHECK(std::abs(f.direction - cplx(-1.0, 0.0)) < 1e-15);
            }
            if (f.kind == FeatureKind::point) {
                point = true;
                CHECK(std::abs(f.anchor - cplx(-0.125, 0.0)) < 1e-15);
            }
        }
        CHECK(ray);
        CHECK(point);
    }
    SECTION("quadratic denominators give points") {
        const auto s = singular_structure(parse("1/(z^2+4)"));
        REQUIRE(s.features.size() == 2);
        for (const auto& f : s.features) {
            CHECK(f.kind == FeatureKind::point);
            CHECK(std::abs(std::abs(f.anchor) - 2.0) < 1e-15);
        }
    }
    SECTION("unrecognised singularities fall back to evaluation") {
        CHECK(singular_structure(parse("1/sin(z)")).detect_by_evaluation);
        CHECK(singular_structure(parse("gamma(z)")).detect_by_evaluation);
        CHECK(singular_structure(parse("sqrt(z^3+1)")).detect_by_evaluation);
    }
}

TEST_CASE("shift translates values and features", "[expr][shift]") {
    const AnalyticFunction e = AnalyticFunction::parse("exp(z)");
    CHECK(e.shifted(1.0).eval_log(0.0).re == Approx(1.0).epsilon(1e-15));

    const AnalyticFunction c = AnalyticFunction::parse("(1-z)^(11/2)");
    const AnalyticFunction cs = c.shifted(std::numbers::sqrt2 / 2);
    REQUIRE(cs.singularities().size() == 1);
    CHECK(std::abs(cs.singularities()[0].anchor - cplx(1.0 - std::numbers::sqrt2 / 2, 0.0)) < 1e-15);

    const AnalyticFunction same = c.shifted(0.0);
    for (const cplx z : {cplx(0.1, 0.2), cplx(-2.0, 1.0), cplx(0.5, -0.5)}) {
        CHECK(same.eval_log(z).re == c.eval_log(z).re);
        CHECK(same.eval_log(z).im == c.eval_log(z).im);
    }
}
