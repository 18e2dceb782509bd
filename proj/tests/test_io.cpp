#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "initlab/io.hpp"

using namespace initlab;

namespace {

namespace stdfs = std::filesystem;

struct TempDir {
    stdfs::path path;
    TempDir() {
        path = stdfs::temp_directory_path() /
               ("initlab_io_" + std::to_string(::getpid()));
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

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string s((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
    return s;
}

FreestreamConditions basic_fs() {
    FreestreamConditions fs;
    fs.u_inf = 1.25;
    fs.rho = 1.1;
    fs.nu = 0.003;
    fs.k_inf = 2e-4;
    fs.l0 = 0.75;
    return fs;
}

}  // namespace

TEST_CASE("io: format_double round trips arbitrary doubles") {
    std::mt19937_64 rng(404u);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-40, 40);
    for (int n = 0; n < 2000; ++n) {
        const double x = mant(rng) * std::pow(10.0, expo(rng));
        const std::string s = format_double(x);
        double back = 0.0;
        const auto res =
            std::from_chars(s.data(), s.data() + s.size(), back);
        REQUIRE(res.ec == std::errc());
        CHECK(back == x);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(-2.5) == "-2.5");
}

TEST_CASE("io: force CSV round trips bit-exactly") {
    TempDir tmp;
    ForceSeries series;
    std::mt19937_64 rng(7u);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    for (int n = 0; n < 50; ++n) {
        series.samples.push_back(ForceSample{0.013 * n, dist(rng), dist(rng)});
    }
    const std::string path = tmp.file("force.csv");
    write_force_csv(path, series);

    const ForceSeries back = read_force_csv(path);
    REQUIRE(back.samples.size() == series.samples.size());
    for (std::size_t n = 0; n < series.samples.size(); ++n) {
        CHECK(back.samples[n].t == series.samples[n].t);
        CHECK(back.samples[n].fx == series.samples[n].fx);
        CHECK(back.samples[n].fy == series.samples[n].fy);
    }
}

TEST_CASE("io: filtered CSV keeps the filtered column readable") {
    TempDir tmp;
    ForceSeries series;
    series.samples = {ForceSample{0.0, 1.0, 0.1}, ForceSample{0.1, 2.0, 0.2},
                      ForceSample{0.2, 3.0, 0.3}};
    const std::vector<double> filtered = {1.0, 1.5, 2.5};
    const std::string path = tmp.file("filtered.csv");
    write_filtered_csv(path, series, filtered);

    // Extra columns are ignored by the force reader.
    const ForceSeries back = read_force_csv(path);
    REQUIRE(back.samples.size() == 3);
    CHECK(back.samples[2].fx == 3.0);

    const CsvTable table = read_csv(path);
    REQUIRE(table.column("filtered") >= 0);
    const auto& col =
        table.columns[static_cast<std::size_t>(table.column("filtered"))];
    REQUIRE(col.size() == 3);
    CHECK(col[1] == 1.5);

    // Length mismatch is a programming error worth a loud failure.
    const std::vector<double> wrong = {1.0, 2.0};
    CHECK_THROWS_AS(write_filtered_csv(tmp.file("bad.csv"), series, wrong),
                    IoError);
}

TEST_CASE("io: CSV errors carry the file and line") {
    TempDir tmp;
    const std::string path = tmp.file("broken.csv");
    write_file(path, "t,fx,fy\n0,1,2\n0.1,oops,2\n");
    try {
        read_force_csv(path);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        const std::string msg = e.what();
        CHECK(msg.find(path) != std::string::npos);
        CHECK(msg.find(":3") != std::string::npos);
    }
    write_file(path, "wrong,header\n1,2\n");
    CHECK_THROWS_AS(read_force_csv(path), IoError);
    CHECK_THROWS_AS(read_force_csv(tmp.file("missing.csv")), IoError);
    // Ragged row in the generic reader.
    write_file(path, "a,b\n1,2\n3\n");
    CHECK_THROWS_AS(read_csv(path), IoError);
}

TEST_CASE("io: snapshot restores the exact state at the same resolution") {
    TempDir tmp;
    const Grid g = make_grid(GridSpec{24, 12, 3.0, 1.5});
    const FreestreamConditions fs = basic_fs();
    FlowState s = FlowState::zeros(g);
    std::mt19937_64 rng(99u);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    auto scramble = [&](Field2D& f, bool nonneg) {
        for (int j = 0; j < f.ny(); ++j) {
            for (int i = 0; i < f.nx(); ++i) {
                f(i, j) = nonneg ? std::abs(dist(rng)) : dist(rng);
            }
        }
    };
    scramble(s.u, false);
    scramble(s.v, false);
    scramble(s.p, false);
    scramble(s.k, true);
    s.t = 12.625;

    const std::string path = tmp.file("state.vtk");
    write_snapshot(path, g, s, fs);
    CHECK(stdfs::exists(path + ".meta"));

    const Snapshot snap = read_snapshot(path);
    CHECK(snap.nx == 24);
    CHECK(snap.ny == 12);
    CHECK(snap.lx == 3.0);
    CHECK(snap.has_faces);
    CHECK(snap.has_k);
    CHECK(snap.has_meta);
    CHECK(snap.meta_fs.u_inf == fs.u_inf);
    CHECK(snap.meta_fs.l0 == fs.l0);

    const FlowState back = snapshot_to_state(snap, g, fs.k_inf);
    CHECK(back.t == 12.625);
    for (int j = 0; j < s.u.ny(); ++j) {
        for (int i = 0; i < s.u.nx(); ++i) CHECK(back.u(i, j) == s.u(i, j));
    }
    for (int j = 0; j < s.v.ny(); ++j) {
        for (int i = 0; i < s.v.nx(); ++i) CHECK(back.v(i, j) == s.v(i, j));
    }
    for (int j = 0; j < 12; ++j) {
        for (int i = 0; i < 24; ++i) {
            CHECK(back.p(i, j) == s.p(i, j));
            CHECK(back.k(i, j) == s.k(i, j));
        }
    }
}

TEST_CASE("io: snapshot resampling is exact for smooth fields inside") {
    TempDir tmp;
    const Grid src = make_grid(GridSpec{32, 16, 2.0, 1.0});
    const Grid dst = make_grid(GridSpec{48, 24, 2.0, 1.0});
    const FreestreamConditions fs = basic_fs();
    FlowState s = FlowState::zeros(src);
    // Linear fields: bilinear interpolation reproduces them exactly away
    // from the clamped edge band.
    for (int j = 0; j < s.u.ny(); ++j) {
        for (int i = 0; i < s.u.nx(); ++i) {
            s.u(i, j) = 2.0 + 0.5 * src.x_face(i) + 0.25 * src.y_center(j);
        }
    }
    for (int j = 0; j < s.v.ny(); ++j) {
        for (int i = 0; i < s.v.nx(); ++i) {
            s.v(i, j) = -1.0 + 0.125 * src.x_center(i) - 0.5 * src.y_face(j);
        }
    }
    for (int j = 0; j < 16; ++j) {
        for (int i = 0; i < 32; ++i) {
            s.p(i, j) = 3.0 + src.x_center(i) - src.y_center(j);
            s.k(i, j) = 0.5;
        }
    }

    const std::string path = tmp.file("coarse.vtk");
    write_snapshot(path, src, s, fs);
    const Snapshot snap = read_snapshot(path);
    const FlowState up = snapshot_to_state(snap, dst, fs.k_inf);

    // Interior centers: strictly inside the source center hull.
    for (int j = 2; j < 22; ++j) {
        for (int i = 2; i < 46; ++i) {
            const double expect = 3.0 + dst.x_center(i) - dst.y_center(j);
            CHECK(up.p(i, j) == doctest::Approx(expect).epsilon(1e-12));
            CHECK(up.k(i, j) == doctest::Approx(0.5).epsilon(1e-12));
        }
    }
    // Interior u faces come from center averaging: exact on linears.
    for (int j = 2; j < 22; ++j) {
        for (int i = 2; i < 46; ++i) {
            const double expect =
                2.0 + 0.5 * dst.x_face(i) + 0.25 * dst.y_center(j);
            CHECK(up.u(i, j) == doctest::Approx(expect).epsilon(1e-10));
        }
    }
    // A constant field must survive everywhere, including edges.
    FlowState c = FlowState::zeros(src);
    c.u.fill(4.0);
    c.v.fill(-2.0);
    c.p.fill(1.0);
    c.k.fill(0.25);
    write_snapshot(path, src, c, fs);
    const FlowState upc = snapshot_to_state(read_snapshot(path), dst, fs.k_inf);
    for (int j = 0; j < 24; ++j) {
        for (int i = 0; i <= 48; ++i) {
            CHECK(upc.u(i, j) == doctest::Approx(4.0).epsilon(1e-13));
        }
    }
    for (int j = 0; j < 24; ++j) {
        for (int i = 0; i < 48; ++i) {
            CHECK(upc.p(i, j) == doctest::Approx(1.0).epsilon(1e-13));
        }
    }
}

TEST_CASE("io: snapshot rejects mismatched physical domains") {
    TempDir tmp;
    const Grid src = make_grid(GridSpec{16, 8, 2.0, 1.0});
    const Grid other = make_grid(GridSpec{16, 8, 2.5, 1.0});
    const FreestreamConditions fs = basic_fs();
    const FlowState s = FlowState::zeros(src);
    const std::string path = tmp.file("dom.vtk");
    write_snapshot(path, src, s, fs);
    const Snapshot snap = read_snapshot(path);
    CHECK_THROWS_AS(snapshot_to_state(snap, other, fs.k_inf), IoError);
}

TEST_CASE("io: missing k falls back to the default level") {
    Snapshot snap;
    snap.nx = 16;
    snap.ny = 8;
    snap.lx = 2.0;
    snap.ly = 1.0;
    snap.u_center = Field2D(16, 8);
    snap.v_center = Field2D(16, 8);
    snap.p = Field2D(16, 8);
    snap.k = Field2D(16, 8);
    snap.has_k = false;
    const Grid g = make_grid(GridSpec{16, 8, 2.0, 1.0});
    const FlowState s = snapshot_to_state(snap, g, 3e-3);
    for (int j = 0; j < 8; ++j) {
        for (int i = 0; i < 16; ++i) CHECK(s.k(i, j) == 3e-3);
    }
}

TEST_CASE("io: snapshot reader rejects what it cannot honor") {
    TempDir tmp;
    const std::string path = tmp.file("alien.vtk");
    write_file(path,
               "# vtk DataFile Version 3.0\nx\nBINARY\n"
               "DATASET STRUCTURED_POINTS\n");
    CHECK_THROWS_AS(read_snapshot(path), IoError);
    CHECK_THROWS_AS(read_snapshot(tmp.file("nothere.vtk")), IoError);
}

TEST_CASE("io: surrogate files use the pinned layout and round trip") {
    TempDir tmp;
    SurrogateData data;
    data.xmin = 0.5;
    data.ymin = 0.25;
    data.xmax = 3.5;
    data.ymax = 1.75;
    std::mt19937_64 rng(31u);
    std::uniform_real_distribution<double> ux(0.5, 3.5), uy(0.25, 1.75),
        uv(-2.0, 2.0);
    for (int n = 0; n < 25; ++n) {
        data.points.push_back(SurrogatePoint{ux(rng), uy(rng), uv(rng),
                                             uv(rng), uv(rng),
                                             std::abs(uv(rng))});
    }
    const std::string path = tmp.file("cloud.surr");
    write_surrogate(path, data);

    const std::string text = slurp(path);
    CHECK(text.rfind("SURROGATE v1\n", 0) == 0);
    const std::size_t l2 = text.find('\n') + 1;
    CHECK(text.compare(l2, 5, "bbox ") == 0);
    const std::size_t l3 = text.find('\n', l2) + 1;
    CHECK(text.compare(l3, 5, "n 25\n") == 0);

    const SurrogateData back = read_surrogate(path);
    CHECK(back.xmin == 0.5);
    CHECK(back.ymax == 1.75);
    REQUIRE(back.points.size() == 25);
    for (std::size_t n = 0; n < 25; ++n) {
        CHECK(back.points[n].x == data.points[n].x);
        CHECK(back.points[n].u == data.points[n].u);
        CHECK(back.points[n].k == data.points[n].k);
    }
}

TEST_CASE("io: surrogate reader rejects malformed and invalid data") {
    TempDir tmp;
    const std::string path = tmp.file("bad.surr");

    write_file(path, "NOPE v1\nbbox 0 0 1 1\nn 4\n");
    CHECK_THROWS_AS(read_surrogate(path), IoError);

    // Too few points.
    write_file(path,
               "SURROGATE v1\nbbox 0 0 1 1\nn 3\n"
               "0.1 0.1 1 0 0 0\n0.2 0.2 1 0 0 0\n0.3 0.3 1 0 0 0\n");
    CHECK_THROWS_AS(read_surrogate(path), IoError);

    // Negative k on data line 5 (file line 5).
    write_file(path,
               "SURROGATE v1\nbbox 0 0 1 1\nn 4\n"
               "0.1 0.1 1 0 0 0\n0.2 0.2 1 0 0 -1e-6\n"
               "0.3 0.3 1 0 0 0\n0.4 0.4 1 0 0 0\n");
    try {
        read_surrogate(path);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        const std::string msg = e.what();
        CHECK(msg.find(":5") != std::string::npos);
        CHECK(msg.find("k") != std::string::npos);
    }

    // Point outside the box.
    write_file(path,
               "SURROGATE v1\nbbox 0 0 1 1\nn 4\n"
               "0.1 0.1 1 0 0 0\n1.5 0.2 1 0 0 0\n"
               "0.3 0.3 1 0 0 0\n0.4 0.4 1 0 0 0\n");
    CHECK_THROWS_AS(read_surrogate(path), IoError);

    // Malformed number with the line in the message.
    write_file(path,
               "SURROGATE v1\nbbox 0 0 1 1\nn 4\n"
               "0.1 0.1 1 0 0 0\n0.2 frog 1 0 0 0\n"
               "0.3 0.3 1 0 0 0\n0.4 0.4 1 0 0 0\n");
    try {
        read_surrogate(path);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find(":5") != std::string::npos);
    }
}
