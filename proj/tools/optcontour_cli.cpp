// optcontour: high-order derivatives by Cauchy integrals on optimised contours.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "io.hpp"
#include "optcontour/pipeline.hpp"
#include "svg.hpp"

using namespace optcontour;
using io::json;

namespace {

constexpr int kExitNotConverged = 2;

struct Options {
    RunConfig run;
    std::string at = "0";
    std::string diagonals = "on";
    std::string algorithm = "heuristic";
    std::string out, svg, trace, progress, graph_out, sweep;
    bool both_grids = false;
};

cplx parse_point(const std::string& text) {
    const auto comma = text.find(',');
    try {
        std::size_t used = 0;
        if (comma == std::string::npos) {
            const double re = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return {re, 0.0};
        }
        const std::string a = text.substr(0, comma), b = text.substr(comma + 1);
        std::size_t ua = 0, ub = 0;
        const double re = std::stod(a, &ua), im = std::stod(b, &ub);
        if (ua != a.size() || ub != b.size()) throw std::invalid_argument(text);
        return {re, im};
    } catch (const std::logic_error&) {
        throw Error(ErrorCode::invalid_argument, "--at expects a real number or re,im: " + text);
    }
}

void finish(Options& o) {
    o.run.at = parse_point(o.at);
    o.run.diagonals = o.diagonals == "on";
    o.run.algorithm = o.algorithm == "provan" ? SewAlgorithm::provan : SewAlgorithm::heuristic;
    validate(o.run);
}

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--function", o.run.function, "f(z), e.g. \"exp(z)\"")->required();
    cmd->add_option("--order", o.run.order, "derivative order n")->required();
    cmd->add_option("--at", o.at, "differentiation point: x or x,y")->capture_default_str();
    cmd->add_option("--grid-size", o.run.grid_size, "vertices per side of the initial grid (odd)")
        ->capture_default_str();
    cmd->add_option("--extent", o.run.extent, "side length of the initial grid (default: searched)");
    cmd->add_option("--diagonals", o.diagonals, "diagonal edges")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    cmd->add_option("--algorithm", o.algorithm, "shortest enclosing walk algorithm")
        ->check(CLI::IsMember({"provan", "heuristic"}))
        ->capture_default_str();
    cmd->add_option("--levels", o.run.levels, "maximum refinement levels")->capture_default_str();
    cmd->add_option("--tol", o.run.quad_tol, "relative quadrature tolerance")->capture_default_str();
    cmd->add_option("--weight-tol", o.run.weight_tol, "stop refining below this weight decrease (nats)")
        ->capture_default_str();
    cmd->add_option("--threads", o.run.threads, "worker threads for the full algorithm (0: all cores)")
        ->capture_default_str();
}

int exit_for(bool converged) { return converged ? 0 : kExitNotConverged; }

void maybe_svg(const Options& o, const AnalyticFunction& f, double extent, const std::vector<const Walk*>& walks) {
    if (o.svg.empty()) return;
    svg::PlotInput in;
    in.title = o.run.function + ", n = " + std::to_string(o.run.order);
    in.extent = extent;
    in.order = o.run.order;
    in.function = &f;
    in.walks = walks;
    io::write_text(o.svg, svg::render(in));
}

int cmd_derive(Options& o) {
    finish(o);
    const PipelineResult p = run_derive(o.run);
    json j = io::derivative_json(o.run, p);
    if (!o.out.empty()) {
        io::write_json(o.out, io::walk_json(p.contour.walk));
        j["walk_file"] = o.out;
    }
    if (!o.trace.empty()) io::write_text(o.trace, io::trace_csv(p.derivative.trace));
    if (!o.progress.empty()) io::write_text(o.progress, io::levels_csv(p.contour.levels));
    maybe_svg(o, *p.function, p.contour.extent.l, {&p.contour.walk});
    std::cout << j.dump(2) << "\n";
    return exit_for(p.derivative.converged);
}

int cmd_contour(Options& o) {
    finish(o);
    const auto f = prepare_function(o.run);
    const OptimizationResult r = run_contour(o.run, f);
    json levels = json::array(), files = json::array();
    for (const auto& rec : r.levels) {
        levels.push_back(io::level_json(rec));
        if (!o.out.empty()) {
            const std::string path = o.out + ".level" + std::to_string(rec.level) + ".json";
            io::write_json(path, io::walk_json(rec.walk));
            files.push_back(path);
        }
    }
    json j = {{"function", o.run.function},
              {"order", o.run.order},
              {"at", io::point_json(o.run.at)},
              {"extent", r.extent.l},
              {"walk", io::walk_json(r.walk)},
              {"levels", std::move(levels)}};
    if (!o.out.empty()) j["walk_files"] = std::move(files);
    if (!o.graph_out.empty()) io::write_json(o.graph_out, io::graph_json(r.graph));
    if (!o.progress.empty()) io::write_text(o.progress, io::levels_csv(r.levels));
    std::vector<const Walk*> walks;
    for (const auto& rec : r.levels) walks.push_back(&rec.walk);
    maybe_svg(o, *f, r.extent.l, walks);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_compare(Options& o) {
    finish(o);
    if (o.sweep.empty()) {
        const CircleComparison c = compare_circle(o.run);
        const json j = {{"function", o.run.function},
                        {"order", o.run.order},
                        {"at", io::point_json(o.run.at)},
                        {"log10_kappa_sew", io::number(c.log10_kappa_sew)},
                        {"circle", io::circle_json(c.circle)},
                        {"log10_ratio", io::number(c.circle.log10_kappa - c.log10_kappa_sew)},
                        {"converged", c.converged}};
        std::cout << j.dump(2) << "\n";
        return exit_for(c.converged);
    }
    int n1 = 0, n2 = 0, step = 1;
    if (std::sscanf(o.sweep.c_str(), "%d:%d:%d", &n1, &n2, &step) != 3 || n1 < 0 || n2 < n1 || step < 1) {
        throw Error(ErrorCode::invalid_argument, "--sweep expects n1:n2:step");
    }
    std::string csv = "n,log10_kappa_sew,log10_kappa_circle\n";
    bool converged = true;
    for (int n = n1; n <= n2; n += step) {
        RunConfig c = o.run;
        c.order = n;
        const CircleComparison r = compare_circle(c);
        converged = converged && r.converged;
        csv += std::to_string(n) + "," + io::num(r.log10_kappa_sew) + "," + io::num(r.circle.log10_kappa) + "\n";
    }
    if (o.out.empty()) {
        std::cout << csv;
    } else {
        io::write_text(o.out, csv);
    }
    return exit_for(converged);
}

int cmd_convergence(Options& o) {
    finish(o);
    const std::string csv = io::convergence_csv(convergence_trace(o.run, o.both_grids));
    if (o.out.empty()) {
        std::cout << csv;
    } else {
        io::write_text(o.out, csv);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"High-order derivatives via Cauchy integrals on shortest enclosing walks"};
    app.require_subcommand(1);
    Options o;

    auto* derive = app.add_subcommand("derive", "f^(n)(z0) / n! with condition number, as JSON");
    add_common(derive, o);
    derive->add_option("--out", o.out, "write the final walk JSON here");
    derive->add_option("--trace", o.trace, "write the quadrature convergence trace CSV here");
    derive->add_option("--progress", o.progress, "write per-level refinement CSV here");
    derive->add_option("--svg", o.svg, "write an SVG plot of the contour here");

    auto* contour = app.add_subcommand("contour", "optimised contour only, as JSON");
    add_common(contour, o);
    contour->add_option("--out", o.out, "prefix for per-level walk files <prefix>.level<k>.json");
    contour->add_option("--svg", o.svg, "write an SVG plot of every level's walk here");
    contour->add_option("--graph-out", o.graph_out, "write the final graph JSON here");
    contour->add_option("--progress", o.progress, "write per-level refinement CSV here");

    auto* compare = app.add_subcommand("compare-circle", "walk vs optimal circle condition numbers");
    add_common(compare, o);
    compare->add_option("--sweep", o.sweep, "n1:n2:step, emits CSV over orders");
    compare->add_option("--out", o.out, "write the sweep CSV here instead of stdout");

    auto* conv = app.add_subcommand("convergence", "relative error against node count, as CSV");
    add_common(conv, o);
    conv->add_flag("--both-grids", o.both_grids, "with and without diagonals");
    conv->add_option("--out", o.out, "write the CSV here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << io::error_json(ErrorCode::invalid_argument, e.what()).dump() << "\n";
        return static_cast<int>(ErrorCode::invalid_argument);
    }

    try {
        if (derive->parsed()) return cmd_derive(o);
        if (contour->parsed()) return cmd_contour(o);
        if (compare->parsed()) return cmd_compare(o);
        return cmd_convergence(o);
    } catch (const Error& e) {
        std::cerr << io::error_json(e.code(), e.what()).dump() << "\n";
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << io::error_json(ErrorCode::invalid_argument, e.what()).dump() << "\n";
        return static_cast<int>(ErrorCode::invalid_argument);
    }
}
