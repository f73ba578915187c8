// Condition numbers of optimised walks against optimal circles for a few
// classic test functions, on 51x51 initial grids.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "optcontour.hpp"

using namespace optcontour;

int main() {
    struct Row {
        const char* function;
        int order;
        double at;
    };
    const Row rows[] = {
        {"exp(z)", 300, 0.0},
        {"1/gamma(z)", 300, 0.0},
        {"(1-z)^(11/2)", 10, 0.0},
        {"exp(1/(1+8*z)^(1/5))*(1-z)^(11/2)*besselj0(z)", 100, std::numbers::sqrt2 / 2},
    };
    std::printf("%-48s %5s %12s %12s %10s  %s\n", "f(z)", "n", "kappa(W)", "kappa(C)", "r*", "time");
    for (const Row& r : rows) {
        RunConfig c;
        c.function = r.function;
        c.order = r.order;
        c.at = r.at;
        const auto t0 = std::chrono::steady_clock::now();
        const PipelineResult p = run_derive(c);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const CircleResult circ = optimal_radius(r.order, *p.function);
        std::printf("%-48s %5d %12.3g %12.3g %10.6g  %.2fs\n", r.function, r.order,
                    std::pow(10.0, p.derivative.log10_kappa), std::pow(10.0, circ.log10_kappa), circ.r_star, secs);
    }
}
