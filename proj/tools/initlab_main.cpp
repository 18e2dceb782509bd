#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "initlab/convergence.hpp"
#include "initlab/experiment.hpp"
#include "initlab/init_strategies.hpp"
#include "initlab/io.hpp"

namespace {

int cmd_run(const std::string& config_path) {
    const initlab::ExperimentConfig cfg = initlab::load_config(config_path);
    const initlab::ComparisonTable table = initlab::run_experiment(cfg);
    std::printf("%-18s %-7s %12s %12s %16s\n", "strategy", "status",
                "t_conv [s]", "t_conv [CTU]", "final force");
    for (const initlab::StrategyResult& r : table.rows) {
        if (r.ok) {
            std::printf("%-18s %-7s %12.6g %12.6g %16.8g\n", r.name.c_str(),
                        "ok", r.t_conv, r.t_conv_ctu, r.final_filtered);
        } else {
            std::printf("%-18s %-7s %s\n", r.name.c_str(), "failed",
                        r.error.c_str());
        }
    }
    std::printf("outputs: %s\n", cfg.output_dir.c_str());
    return table.all_ok() ? 0 : 2;
}

int cmd_analyze(const std::string& series_path, double tol) {
    const initlab::ForceSeries series = initlab::read_force_csv(series_path);
    std::vector<double> t, fx;
    t.reserve(series.samples.size());
    fx.reserve(series.samples.size());
    for (const initlab::ForceSample& s : series.samples) {
        t.push_back(s.t);
        fx.push_back(s.fx);
    }
    const std::vector<double> filtered = initlab::running_median(fx);
    const initlab::ConvergenceReport rep =
        initlab::convergence_time(t, fx, filtered, tol);
    std::printf("samples:        %zu\n", t.size());
    std::printf("t_conv [s]:     %.10g\n", rep.t_conv);
    std::printf("sample index:   %zu\n", rep.index);
    std::printf("final filtered: %.10g\n", rep.final_value);
    std::printf("band (%s):      %.10g\n",
                rep.absolute_band ? "abs" : "rel", rep.band);
    return 0;
}

int cmd_plot(const std::string& output_dir) {
    initlab::emit_plots(output_dir);
    std::printf("wrote %s/force_raw.svg and %s/force_filtered.svg\n",
                output_dir.c_str(), output_dir.c_str());
    return 0;
}

int cmd_surrogate_proxy(const std::string& config_path,
                        const std::string& out_path) {
    const initlab::ExperimentConfig cfg = initlab::load_config(config_path);
    if (cfg.surrogate_from_file) {
        throw initlab::ConfigError(
            config_path +
            ": config selects a file surrogate; surrogate-proxy needs "
            "surrogate = proxy:<factor>");
    }
    const initlab::Grid grid = initlab::make_grid(cfg.grid);
    const initlab::ObstacleMask mask =
        initlab::rasterize_obstacle(grid, cfg.shape);
    const initlab::SurrogateData data = initlab::build_proxy_surrogate(
        grid, mask, cfg.fs, cfg.surrogate_factor);
    initlab::write_surrogate(out_path, data);
    std::printf("wrote %zu surrogate points to %s\n", data.points.size(),
                out_path.c_str());
    std::printf("bbox: [%.6g, %.6g] x [%.6g, %.6g]\n", data.xmin, data.xmax,
                data.ymin, data.ymax);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"initlab: compares initialization strategies for a 2D "
                 "incompressible obstacle-flow solver"};
    app.require_subcommand(1);

    std::string run_config;
    CLI::App* run = app.add_subcommand(
        "run", "Run every configured strategy and write the comparison table");
    run->add_option("config", run_config, "experiment config file")
        ->required();

    std::string series_path;
    double tol = 0.01;
    CLI::App* analyze = app.add_subcommand(
        "analyze", "Report the convergence time of a force-series CSV");
    analyze->add_option("series", series_path, "force CSV (t,fx,fy)")
        ->required();
    analyze->add_option("--tol", tol, "relative settling band")
        ->check(CLI::PositiveNumber);

    std::string plot_dir;
    CLI::App* plot = app.add_subcommand(
        "plot", "Render force-history SVGs from an experiment output dir");
    plot->add_option("output_dir", plot_dir, "experiment output directory")
        ->required();

    std::string sp_config;
    std::string sp_out;
    CLI::App* sp = app.add_subcommand(
        "surrogate-proxy",
        "Build the coarse-grid surrogate cloud and write it to a file");
    sp->add_option("config", sp_config, "experiment config file")->required();
    sp->add_option("-o,--output", sp_out, "surrogate output path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_config);
        if (analyze->parsed()) return cmd_analyze(series_path, tol);
        if (plot->parsed()) return cmd_plot(plot_dir);
        if (sp->parsed()) return cmd_surrogate_proxy(sp_config, sp_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
