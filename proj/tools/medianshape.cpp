#include "medianshape/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace medianshape;

void add_fit_knobs(CLI::App* cmd, FitConfig& c, std::string& objective, std::string& method)
{
    cmd->add_option("--objective", objective, "l1 or l2")->check(CLI::IsMember({"l1", "l2"}));
    cmd->add_option("--method", method, "pipeline, direct or oracle")
        ->check(CLI::IsMember({"pipeline", "direct", "oracle"}));
    cmd->add_option("--eps", c.eps, "Approximation parameter in (0, 1/4)");
    cmd->add_option("--seed", c.seed, "Seed for every random choice");
    cmd->add_option("--budget", c.budget, "Cap on cost evaluations during the search");
    cmd->add_option("--chernoff-c", c.chernoff_c, "Sampling constant of the level reduction");
    cmd->add_option("--m-c", c.m_c, "Constant of the exact-prefix length");
    cmd->add_option("--grid", c.grid, "Coarse grid cells per axis (0 picks a default)");
    cmd->add_option("--top-k", c.top_k, "Coarse cells kept for refinement");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Robust L1/L2 shape fitting"};
    app.require_subcommand(1);
    app.set_version_flag("--version", cli::kVersion);

    cli::FitOptions fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a shape to points (CSV) or flats (JSON)");
    fit_cmd->add_option("--shape", fit.shape, "circle, sphere, cylinder, two-lines or flat-median")
        ->check(CLI::IsMember({"circle", "sphere", "cylinder", "two-lines", "flat-median"}));
    fit_cmd->add_option("--input", fit.input, "Input file")->required();
    fit_cmd->add_option("--output", fit.output, "Write the JSON record here instead of stdout");
    add_fit_knobs(fit_cmd, fit.config, fit.objective, fit.method);

    cli::GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic instance");
    gen_cmd->add_option("--kind", gen.kind, "circle, sphere, cylinder, lines, flats or stack-1d")
        ->check(CLI::IsMember({"circle", "sphere", "cylinder", "lines", "flats", "stack-1d"}));
    gen_cmd->add_option("--n", gen.spec.n, "Number of points (outliers included)");
    gen_cmd->add_option("--noise", gen.spec.noise, "Gaussian noise sigma");
    gen_cmd->add_option("--outliers", gen.spec.outlier_frac, "Outlier fraction in [0, 1)");
    gen_cmd->add_option("--outlier-box", gen.spec.outlier_box_scale, "Outlier box scale relative to the inliers");
    gen_cmd->add_option("--flat-dim", gen.spec.flat_dim, "Ambient dimension for flats");
    gen_cmd->add_option("--seed", gen.spec.seed, "Random seed");
    gen_cmd->add_option("--output", gen.output, "Output file (stdout if omitted)");
    gen_cmd->add_option("--truth", gen.truth, "Write ground truth and outlier count as JSON");

    cli::BenchOptions bench;
    auto* bench_cmd = app.add_subcommand("bench", "Time the reduction and search phases across sizes");
    bench_cmd->add_option("--shape", bench.shape, "Shape to fit");
    bench_cmd->add_option("--sizes", bench.sizes, "Instance sizes")->delimiter(',');
    bench_cmd->add_option("--eps", bench.eps, "Values of eps")->delimiter(',');
    bench_cmd->add_option("--repeats", bench.repeats, "Runs per configuration (median reported)");
    bench_cmd->add_option("--seed", bench.seed, "Random seed");
    bench_cmd->add_option("--noise", bench.noise, "Instance noise sigma");
    bench_cmd->add_option("--outliers", bench.outlier_frac, "Instance outlier fraction");
    bench_cmd->add_option("--method", bench.method, "pipeline or direct");
    bench_cmd->add_option("--output", bench.output, "Output CSV (stdout if omitted)");

    cli::PlotOptions plot;
    auto* plot_cmd = app.add_subcommand("plot-data", "Export a 2D cost-landscape slice around the fit");
    plot_cmd->add_option("--shape", plot.shape, "Shape to fit");
    plot_cmd->add_option("--input", plot.input, "Input file")->required();
    plot_cmd->add_option("--output", plot.output, "Output TSV (stdout if omitted)");
    plot_cmd->add_option("--slice-grid", plot.grid, "Samples per slice axis");
    plot_cmd->add_option("--axes", plot.axes, "Two parameter indices (last index = height)")->delimiter(',');
    plot_cmd->add_option("--span", plot.span, "Half-width of the slice (0: tenth of the diameter)");
    add_fit_knobs(plot_cmd, plot.config, plot.objective, plot.method);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kExitInput;
    }

    if (*fit_cmd) return cli::cmd_fit(fit, std::cout, std::cerr);
    if (*gen_cmd) return cli::cmd_gen(gen, std::cout, std::cerr);
    if (*bench_cmd) return cli::cmd_bench(bench, std::cout, std::cerr);
    return cli::cmd_plot_data(plot, std::cout, std::cerr);
}
