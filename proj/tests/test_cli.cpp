#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include "initlab/io.hpp"

namespace {

namespace stdfs = std::filesystem;

const std::string kBin = INITLAB_BIN;

struct TempDir {
    stdfs::path path;
    explicit TempDir(const std::string& tag) {
        path = stdfs::temp_directory_path() / ("initlab_cli_" + tag);
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

struct CmdResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

CmdResult run_cli(const TempDir& tmp, const std::string& args) {
    const std::string out = tmp.file("stdout.txt");
    const std::string err = tmp.file("stderr.txt");
    const std::string cmd = kBin + " " + args + " >" + out + " 2>" + err;
    const int status = std::system(cmd.c_str());
    CmdResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

void write_config(const std::string& path, const std::string& output_dir,
                  const std::string& strategies,
                  const std::string& extra = "") {
    std::ofstream cfg(path);
    cfg << "[case]\n"
           "nx = 64\nny = 32\nlx = 4.0\nly = 2.0\n"
           "shape = rect\ncx = 1.5\ncy = 1.0\nwidth = 0.5\nheight = 0.5\n"
           "u_inf = 1.0\nrho = 1.0\nnu = 0.01\nk_inf = 2e-4\nl0 = 0.5\n"
           "[solver]\n"
           "dt = 0.01\nt_end = 0.3\n"
           "[experiment]\n"
        << "strategies = " << strategies << "\n"
        << "output_dir = " << output_dir << "\n"
        << extra;
}

}  // namespace

TEST_CASE("cli: usage errors and help") {
    TempDir tmp("help");
    CHECK(run_cli(tmp, "").exit_code != 0);
    const CmdResult help = run_cli(tmp, "--help");
    CHECK(help.exit_code == 0);
    CHECK(help.out.find("run") != std::string::npos);
    CHECK(help.out.find("analyze") != std::string::npos);
    CHECK(help.out.find("plot") != std::string::npos);
    CHECK(help.out.find("surrogate-proxy") != std::string::npos);
}

TEST_CASE("cli: run exits 0 on success and writes the table") {
    TempDir tmp("run");
    const std::string cfg = tmp.file("case.ini");
    const std::string out = tmp.file("out");
    write_config(cfg, out, "uniform, potential");
    const CmdResult r = run_cli(tmp, "run " + cfg);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("uniform") != std::string::npos);
    CHECK(r.out.find("potential") != std::string::npos);
    CHECK(r.out.find("ok") != std::string::npos);
    CHECK(stdfs::exists(out + "/comparison.csv"));
    CHECK(stdfs::exists(out + "/force_filtered.svg"));
}

TEST_CASE("cli: run exits 1 on config trouble and 2 on partial failure") {
    TempDir tmp("codes");
    CHECK(run_cli(tmp, "run " + tmp.file("absent.ini")).exit_code == 1);

    const std::string bad = tmp.file("bad.ini");
    {
        std::ofstream f(bad);
        f << "[case]\nnx = 64\nfrobnicate = 1\n";
    }
    const CmdResult rb = run_cli(tmp, "run " + bad);
    CHECK(rb.exit_code == 1);
    CHECK(rb.err.find("error:") != std::string::npos);
    CHECK(rb.err.find("unknown key") != std::string::npos);

    const std::string cfg = tmp.file("partial.ini");
    const std::string out = tmp.file("out");
    write_config(cfg, out, "uniform, prior",
                 "prior_path = " + tmp.file("nope.vtk") + "\n");
    CHECK(run_cli(tmp, "run " + cfg).exit_code == 2);
}

TEST_CASE("cli: analyze reports convergence for a series") {
    TempDir tmp("analyze");
    const std::string csv = tmp.file("force.csv");
    {
        std::ofstream f(csv);
        f << "t,fx,fy\n";
        for (int n = 0; n <= 100; ++n) {
            const double t = 0.01 * n;
            const double fx = 1.0 + std::exp(-t * 20.0);
            f << t << "," << fx << ",0\n";
        }
    }
    const CmdResult r = run_cli(tmp, "analyze " + csv);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("t_conv") != std::string::npos);
    CHECK(r.out.find("final filtered") != std::string::npos);

    const CmdResult loose = run_cli(tmp, "analyze " + csv + " --tol 0.5");
    CHECK(loose.exit_code == 0);

    CHECK(run_cli(tmp, "analyze " + tmp.file("none.csv")).exit_code == 1);
    CHECK(run_cli(tmp, "analyze " + csv + " --tol -1").exit_code != 0);
}

TEST_CASE("cli: plot renders an existing output directory") {
    TempDir tmp("plot");
    const std::string cfg = tmp.file("case.ini");
    const std::string out = tmp.file("out");
    write_config(cfg, out, "uniform");
    REQUIRE(run_cli(tmp, "run " + cfg).exit_code == 0);
    stdfs::remove(out + "/force_raw.svg");
    const CmdResult r = run_cli(tmp, "plot " + out);
    CHECK(r.exit_code == 0);
    CHECK(stdfs::exists(out + "/force_raw.svg"));

    const std::string empty = tmp.file("empty");
    stdfs::create_directories(empty);
    const CmdResult re = run_cli(tmp, "plot " + empty);
    CHECK(re.exit_code == 1);
    CHECK(re.err.find("no series found") != std::string::npos);
}

TEST_CASE("cli: surrogate-proxy writes a readable cloud") {
    TempDir tmp("proxy");
    const std::string cfg = tmp.file("case.ini");
    write_config(cfg, tmp.file("out"), "surrogate_idw");
    const std::string cloud = tmp.file("cloud.surr");
    const CmdResult r = run_cli(tmp, "surrogate-proxy " + cfg + " -o " + cloud);
    CHECK(r.exit_code == 0);
    CHECK(stdfs::exists(cloud));
    const initlab::SurrogateData data = initlab::read_surrogate(cloud);
    CHECK(data.points.size() >= 4);

    // A config that sources the surrogate from a file cannot build a proxy.
    const std::string filecfg = tmp.file("file.ini");
    write_config(filecfg, tmp.file("out2"), "surrogate_idw",
                 "surrogate = file:" + cloud + "\n");
    CHECK(run_cli(tmp, "surrogate-proxy " + filecfg + " -o " +
                           tmp.file("x.surr"))
              .exit_code == 1);
}
