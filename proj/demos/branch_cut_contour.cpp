// Multilevel refinement for (1-z)^(11/2), n = 10: per-level progress, the
// derivative, and the final walk as x,y lines (to the file in argv[1], if given).

#include <cmath>
#include <cstdio>

#include "optcontour.hpp"

using namespace optcontour;

int main(int argc, char** argv) {
    RunConfig c;
    c.function = "(1-z)^(11/2)";
    c.order = 10;
    const PipelineResult p = run_derive(c, [](const LevelRecord& r) {
        std::printf("level %d  h=%-10.4g |V|=%-6zu |E|=%-6zu log10 weight %.6f\n", r.level, r.h, r.vertices, r.edges,
                    r.log_weight / std::numbers::ln10);
    });
    const DerivativeResult& d = p.derivative;
    // (-1)^n binom(11/2, n) = prod_{k<n} (k - 11/2) / (k + 1)
    double exact = 1.0;
    for (int k = 0; k < 10; ++k) exact *= (k - 5.5) / (k + 1.0);
    std::printf("extent %g, walk of %zu edges\n", p.contour.extent.l, p.contour.walk.size());
    std::printf("taylor coefficient %.16e (exact %.16e)\n", d.taylor_coeff.to_complex().real(), exact);
    std::printf("kappa %.4g, %zu nodes on %zu segments (%zu neglected)\n", std::pow(10.0, d.log10_kappa), d.nodes_used,
                d.segments_used, d.segments_neglected);
    if (argc > 1) {
        std::FILE* out = std::fopen(argv[1], "w");
        if (!out) return 1;
        for (cplx z : p.contour.walk.points) std::fprintf(out, "%.17g,%.17g\n", z.real(), z.imag());
        std::fclose(out);
    }
}
