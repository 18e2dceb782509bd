#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "initlab/convergence.hpp"
#include "initlab/experiment.hpp"
#include "initlab/io.hpp"

using namespace initlab;

namespace {

namespace stdfs = std::filesystem;

struct TempDir {
    stdfs::path path;
    explicit TempDir(const std::string& tag) {
        path = stdfs::temp_directory_path() / ("initlab_exp_" + tag);
        std::error_code ec;
        stdfs::remove_all(path, ec);
        stdfs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        stdfs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

/// A small, fast case: 64 x 32 cells, 50 steps.
std::string small_config(const std::string& output_dir,
                         const std::string& strategies,
                         const std::string& extra = "") {
    return "# comparison case\n"
           "[case]\n"
           "nx = 64\n"
           "ny = 32\n"
           "lx = 4.0\n"
           "ly = 2.0\n"
           "shape = rect\n"
           "cx = 1.5\n"
           "cy = 1.0\n"
           "width = 0.5\n"
           "height = 0.5\n"
           "u_inf = 1.0\n"
           "rho = 1.0\n"
           "nu = 0.01\n"
           "k_inf = 2e-4\n"
           "l0 = 0.5\n"
           "\n"
           "[solver]\n"
           "dt = 0.01\n"
           "t_end = 0.5\n"
           "\n"
           "[experiment]\n"
           "strategies = " +
           strategies +
           "\n"
           "output_dir = " +
           output_dir + "\n" + extra;
}

}  // namespace

TEST_CASE("config: full parse with defaults") {
    const ExperimentConfig cfg = parse_config(
        small_config("/tmp/out", "uniform, potential"), "test.ini");
    CHECK(cfg.grid.nx == 64);
    CHECK(cfg.grid.ly == 2.0);
    CHECK(std::holds_alternative<RectShape>(cfg.shape));
    CHECK(std::get<RectShape>(cfg.shape).width == 0.5);
    CHECK(cfg.fs.nu == 0.01);
    CHECK(cfg.solver.dt == 0.01);
    CHECK(cfg.solver.cfl_limit == 0.9);       // default
    CHECK(cfg.solver.poisson_tol == 1e-7);    // default
    CHECK(cfg.solver.n_correctors == 2);      // default
    CHECK(cfg.tol == 0.01);                   // default
    CHECK(cfg.idw.power == 2.0);
    CHECK(cfg.idw.k_nearest == 8);
    CHECK(cfg.seed_stride == 4);
    CHECK_FALSE(cfg.surrogate_from_file);
    CHECK(cfg.surrogate_factor == 4);
    REQUIRE(cfg.strategies.size() == 2);
    CHECK(cfg.strategies[0].kind == StrategyKind::kUniform);
    CHECK(cfg.strategies[1].kind == StrategyKind::kPotential);
    CHECK_FALSE(cfg.blend.has_value());
    CHECK(cfg.output_dir == "/tmp/out");
}

TEST_CASE("config: unknown keys are rejected with their line") {
    try {
        parse_config("[case]\nnx = 64\nfrobnicate = 1\n", "bad.ini");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("unknown key 'frobnicate'") != std::string::npos);
        CHECK(msg.find("at line 3") != std::string::npos);
    }
    // Reopening a section is harmless; a solver key inside [case] is not.
    CHECK_NOTHROW(
        parse_config(small_config("/tmp/x", "uniform") + "\n[case]\n",
                     "dup.ini"));
    try {
        parse_config("[case]\nnx = 64\ndt = 0.1\n", "bad2.ini");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("unknown key 'dt'") !=
              std::string::npos);
    }
    // A schema-valid key that the chosen shape cannot use is flagged too.
    try {
        parse_config(small_config("/tmp/x", "uniform", "") + "\n[case]\nradius = 1\n",
                     "mis.ini");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("radius") != std::string::npos);
    }
}

TEST_CASE("config: structural errors carry context") {
    CHECK_THROWS_AS(parse_config("nx = 64\n", "a.ini"), ConfigError);
    CHECK_THROWS_AS(parse_config("[banana]\n", "b.ini"), ConfigError);
    CHECK_THROWS_AS(parse_config("[case]\nnx 64\n", "c.ini"), ConfigError);
    CHECK_THROWS_AS(parse_config("[case]\nnx = 64\nnx = 32\n", "d.ini"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("[case]\nnx = sixty\n", "e.ini"), ConfigError);
    CHECK_THROWS_AS(parse_config("[case]\nnx = 64.5\n", "f.ini"), ConfigError);
}

TEST_CASE("config: invalid grid values name the grid contract") {
    std::string text = small_config("/tmp/x", "uniform");
    const auto pos = text.find("nx = 64");
    text.replace(pos, 7, "nx = -4");
    try {
        parse_config(text, "neg.ini");
        FAIL("expected a throw");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("GridSpec") != std::string::npos);
    }
}

TEST_CASE("config: strategy list validation") {
    CHECK_THROWS_AS(
        parse_config(small_config("/tmp/x", "warp_drive"), "s.ini"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(small_config("/tmp/x", "uniform, uniform"), "s.ini"),
        ConfigError);
    // prior needs a path.
    CHECK_THROWS_AS(parse_config(small_config("/tmp/x", "prior"), "s.ini"),
                    ConfigError);
    CHECK_NOTHROW(parse_config(
        small_config("/tmp/x", "prior", "prior_path = /tmp/warm.vtk\n"),
        "s.ini"));
}

TEST_CASE("config: surrogate source parsing") {
    ExperimentConfig cfg = parse_config(
        small_config("/tmp/x", "surrogate_idw", "surrogate = proxy:8\n"),
        "t.ini");
    CHECK_FALSE(cfg.surrogate_from_file);
    CHECK(cfg.surrogate_factor == 8);

    cfg = parse_config(
        small_config("/tmp/x", "surrogate_idw", "surrogate = file:/tmp/c.surr\n"),
        "t.ini");
    CHECK(cfg.surrogate_from_file);
    CHECK(cfg.surrogate_path == "/tmp/c.surr");

    CHECK_THROWS_AS(
        parse_config(small_config("/tmp/x", "uniform", "surrogate = magic\n"),
                     "t.ini"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(small_config("/tmp/x", "uniform", "surrogate = proxy:1\n"),
                     "t.ini"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(small_config("/tmp/x", "uniform", "surrogate = proxy:x\n"),
                     "t.ini"),
        ConfigError);
}

TEST_CASE("config: blend band must come as a pair and be ordered") {
    const ExperimentConfig cfg = parse_config(
        small_config("/tmp/x", "surrogate_hybrid",
                     "k_lower = 4e-4\nk_upper = 9e-4\n"),
        "u.ini");
    REQUIRE(cfg.blend.has_value());
    CHECK(cfg.blend->k_lower == 4e-4);
    CHECK(cfg.blend->k_upper == 9e-4);
    CHECK(cfg.blend->k_inf == 2e-4);

    CHECK_THROWS_AS(
        parse_config(small_config("/tmp/x", "uniform", "k_lower = 4e-4\n"),
                     "u.ini"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(small_config("/tmp/x", "uniform",
                                  "k_lower = 9e-4\nk_upper = 4e-4\n"),
                     "u.ini"),
        InvalidArgument);
}

TEST_CASE("config: booleans and numeric guards") {
    const ExperimentConfig cfg = parse_config(
        small_config("/tmp/x", "uniform",
                     "snapshot_final = true\nparallel = false\n"),
        "v.ini");
    CHECK(cfg.snapshot_final);
    CHECK_FALSE(cfg.parallel);
    CHECK_THROWS_AS(
        parse_config(small_config("/tmp/x", "uniform", "parallel = yes\n"),
                     "v.ini"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(small_config("/tmp/x", "uniform", "tol = 0\n"), "v.ini"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(small_config("/tmp/x", "uniform", "idw_k = 0\n"),
                     "v.ini"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(small_config("/tmp/x", "uniform", "perturb_amp = -0.1\n"),
                     "v.ini"),
        ConfigError);
}

TEST_CASE("experiment: a small comparison runs end to end") {
    TempDir tmp("run");
    const std::string out = tmp.file("out");
    const ExperimentConfig cfg =
        parse_config(small_config(out, "uniform, potential"), "run.ini");
    const ComparisonTable table = run_experiment(cfg);

    REQUIRE(table.rows.size() == 2);
    CHECK(table.all_ok());
    CHECK(table.rows[0].name == "uniform");
    CHECK(table.rows[1].name == "potential");
    const StrategyResult* uni = table.find("uniform");
    REQUIRE(uni != nullptr);
    CHECK(uni->ok);
    CHECK(uni->t_conv >= 0.0);
    CHECK(uni->t_conv <= 0.5);
    CHECK(uni->t_conv_ctu == doctest::Approx(uni->t_conv * 1.0 / 0.5));
    CHECK(std::isfinite(uni->final_filtered));
    CHECK(uni->init_seconds >= 0.0);
    CHECK(uni->solve_seconds_to_conv >= 0.0);
    CHECK(uni->solve_seconds_total >= uni->solve_seconds_to_conv);

    for (const std::string name : {"uniform", "potential"}) {
        CHECK(stdfs::exists(out + "/" + name + "/force.csv"));
        CHECK(stdfs::exists(out + "/" + name + "/filtered.csv"));
        const ForceSeries series =
            read_force_csv(out + "/" + name + "/force.csv");
        CHECK(series.samples.size() == 51);  // initial sample + 50 steps
        CHECK(series.samples.front().t == 0.0);
    }
    CHECK(stdfs::exists(out + "/comparison.csv"));
    CHECK(stdfs::exists(out + "/comparison.txt"));
    CHECK(stdfs::exists(out + "/timings.csv"));
    CHECK(stdfs::exists(out + "/force_raw.svg"));
    CHECK(stdfs::exists(out + "/force_filtered.svg"));

    const std::string csv = slurp(out + "/comparison.csv");
    CHECK(csv.rfind("strategy,status,t_conv_s,t_conv_ctu,final_filtered_force",
                    0) == 0);
    CHECK(csv.find("uniform,ok,") != std::string::npos);
    const std::string txt = slurp(out + "/comparison.txt");
    CHECK(txt.find("strategy") != std::string::npos);
    CHECK(txt.find("potential") != std::string::npos);
}

TEST_CASE("experiment: reruns reproduce the deterministic outputs exactly") {
    TempDir tmp("det");
    const std::string out1 = tmp.file("a");
    const std::string out2 = tmp.file("b");
    const std::string extra = "perturb_amp = 0.05\n";
    run_experiment(parse_config(small_config(out1, "uniform, potential", extra),
                                "det.ini"));
    run_experiment(parse_config(small_config(out2, "uniform, potential", extra),
                                "det.ini"));
    CHECK(slurp(out1 + "/comparison.csv") == slurp(out2 + "/comparison.csv"));
    CHECK(slurp(out1 + "/uniform/force.csv") ==
          slurp(out2 + "/uniform/force.csv"));
    CHECK(slurp(out1 + "/potential/filtered.csv") ==
          slurp(out2 + "/potential/filtered.csv"));
}

TEST_CASE("experiment: table rows match re-analysis of their own series") {
    TempDir tmp("consist");
    const std::string out = tmp.file("out");
    const ExperimentConfig cfg =
        parse_config(small_config(out, "uniform, potential"), "consist.ini");
    const ComparisonTable table = run_experiment(cfg);
    REQUIRE(table.all_ok());

    // The CSV writer emits shortest round-trip doubles, so recomputing the
    // metric from the emitted file must reproduce the table exactly.
    for (const StrategyResult& row : table.rows) {
        const ForceSeries series =
            read_force_csv(out + "/" + row.name + "/force.csv");
        std::vector<double> t, raw;
        for (const ForceSample& s : series.samples) {
            t.push_back(s.t);
            raw.push_back(s.fx);
        }
        const std::vector<double> filtered = running_median(raw);
        const ConvergenceReport rep =
            convergence_time(t, raw, filtered, cfg.tol);
        CHECK(rep.t_conv == row.t_conv);
        CHECK(rep.final_value == row.final_filtered);
    }
}

TEST_CASE("experiment: one failing strategy does not sink the others") {
    TempDir tmp("fail");
    const std::string out = tmp.file("out");
    const ExperimentConfig cfg = parse_config(
        small_config(out, "uniform, prior",
                     "prior_path = " + tmp.file("missing.vtk") + "\n"),
        "fail.ini");
    const ComparisonTable table = run_experiment(cfg);
    REQUIRE(table.rows.size() == 2);
    CHECK_FALSE(table.all_ok());
    const StrategyResult* uni = table.find("uniform");
    const StrategyResult* prior = table.find("prior");
    REQUIRE(uni != nullptr);
    REQUIRE(prior != nullptr);
    CHECK(uni->ok);
    CHECK_FALSE(prior->ok);
    CHECK_FALSE(prior->error.empty());
    CHECK(stdfs::exists(out + "/prior/error.txt"));
    const std::string csv = slurp(out + "/comparison.csv");
    CHECK(csv.find("prior,failed,,,") != std::string::npos);
    // Plots still render for the surviving series.
    CHECK(stdfs::exists(out + "/force_raw.svg"));
}

TEST_CASE("experiment: snapshots are written when requested") {
    TempDir tmp("snap");
    const std::string out = tmp.file("out");
    const ExperimentConfig cfg = parse_config(
        small_config(out, "uniform",
                     "snapshot_final = true\nsnapshot_time_average = true\n"),
        "snap.ini");
    const ComparisonTable table = run_experiment(cfg);
    CHECK(table.all_ok());
    CHECK(stdfs::exists(out + "/uniform/final.vtk"));
    CHECK(stdfs::exists(out + "/uniform/time_average.vtk"));
    const Snapshot snap = read_snapshot(out + "/uniform/final.vtk");
    CHECK(snap.nx == 64);
    CHECK(snap.sim_time == doctest::Approx(0.5));
}

TEST_CASE("experiment: plots from a directory, with warnings for gaps") {
    TempDir tmp("plots");
    const std::string out = tmp.file("out");
    CHECK_THROWS_AS(emit_plots(out + "/nonexistent"), IoError);

    stdfs::create_directories(out);
    CHECK_THROWS_AS(emit_plots(out), IoError);  // no series found
    try {
        emit_plots(out);
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("no series found") !=
              std::string::npos);
    }

    // One good series, one directory without data.
    const ExperimentConfig cfg =
        parse_config(small_config(out, "uniform"), "p.ini");
    run_experiment(cfg);
    stdfs::create_directories(out + "/stray");
    emit_plots(out);
    CHECK(stdfs::exists(out + "/force_raw.svg"));
    CHECK(stdfs::exists(out + "/force_filtered.svg"));
    CHECK(stdfs::exists(out + "/plot_warnings.log"));
    const std::string log = slurp(out + "/plot_warnings.log");
    CHECK(log.find("stray") != std::string::npos);

    // The SVGs are self-contained documents with one polyline per series.
    const std::string svg = slurp(out + "/force_filtered.svg");
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("uniform") != std::string::npos);
}

TEST_CASE("experiment: thread cap honors the environment") {
    ::setenv("INITLAB_THREADS", "3", 1);
    CHECK(thread_cap() == 3);
    ::setenv("INITLAB_THREADS", "frog", 1);
    CHECK(thread_cap() >= 1);
    ::unsetenv("INITLAB_THREADS");
    CHECK(thread_cap() >= 1);
}

TEST_CASE("experiment: parallel execution matches sequential results") {
    TempDir tmp("par");
    const std::string out_seq = tmp.file("seq");
    const std::string out_par = tmp.file("par");
    run_experiment(
        parse_config(small_config(out_seq, "uniform, potential"), "s.ini"));
    ::setenv("INITLAB_THREADS", "2", 1);
    const ComparisonTable table = run_experiment(parse_config(
        small_config(out_par, "uniform, potential", "parallel = true\n"),
        "p.ini"));
    ::unsetenv("INITLAB_THREADS");
    CHECK(table.all_ok());
    CHECK(slurp(out_seq + "/comparison.csv") ==
          slurp(out_par + "/comparison.csv"));
    CHECK(slurp(out_seq + "/uniform/force.csv") ==
          slurp(out_par + "/uniform/force.csv"));
    CHECK(slurp(out_seq + "/potential/force.csv") ==
          slurp(out_par + "/potential/force.csv"));
}
