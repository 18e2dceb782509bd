#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "initlab/potential.hpp"

using namespace initlab;

namespace {

FreestreamConditions basic_fs() {
    FreestreamConditions fs;
    fs.u_inf = 1.0;
    fs.rho = 1.0;
    fs.nu = 0.01;
    fs.k_inf = 1e-4;
    fs.l0 = 0.5;
    return fs;
}

ObstacleMask empty_mask(const Grid& g) {
    ObstacleMask m;
    m.nx = g.spec.nx;
    m.ny = g.spec.ny;
    m.solid.assign(static_cast<std::size_t>(m.nx) * m.ny, 0);
    return m;
}

double center_speed(const PotentialSolution& sol, int i, int j) {
    const double uc = 0.5 * (sol.u(i, j) + sol.u(i + 1, j));
    const double vc = 0.5 * (sol.v(i, j) + sol.v(i, j + 1));
    return std::hypot(uc, vc);
}

}  // namespace

TEST_CASE("potential: empty domain gives uniform flow and zero pressure") {
    const Grid g = make_grid(GridSpec{32, 16, 2.0, 1.0});
    const ObstacleMask m = empty_mask(g);
    const PotentialSolution sol = solve_potential(g, m, basic_fs());
    for (int j = 0; j < 16; ++j) {
        for (int i = 0; i <= 32; ++i) {
            CHECK(sol.u(i, j) == doctest::Approx(1.0).epsilon(1e-7));
        }
    }
    for (int j = 0; j <= 16; ++j) {
        for (int i = 0; i < 32; ++i) {
            CHECK(sol.v(i, j) == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
        }
    }
    for (int j = 0; j < 16; ++j) {
        for (int i = 0; i < 32; ++i) {
            CHECK(sol.p(i, j) == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
        }
    }
    CHECK(sol.iterations >= 0);
}

TEST_CASE("potential: obstacle case conserves mass column by column") {
    // 64 x 32 cells over 4 x 2 m; solid block occupies i in [20, 27],
    // so face planes i <= 20 and i >= 28 are fully fluid.
    const Grid g = make_grid(GridSpec{64, 32, 4.0, 2.0});
    const ObstacleMask m =
        rasterize_obstacle(g, RectShape{1.5, 1.0, 0.5, 0.5});
    const FreestreamConditions fs = basic_fs();
    const PotentialSolution sol = solve_potential(g, m, fs);

    const double target = fs.u_inf * g.spec.ly;
    for (int i = 0; i <= 64; ++i) {
        if (i > 20 && i < 28) continue;  // plane cuts the solid block
        double flux = 0.0;
        for (int j = 0; j < 32; ++j) flux += sol.u(i, j) * g.dy;
        CHECK(flux == doctest::Approx(target).epsilon(1e-4));
    }
}

TEST_CASE("potential: solution is symmetric about the obstacle midplane") {
    const Grid g = make_grid(GridSpec{64, 32, 4.0, 2.0});
    const ObstacleMask m =
        rasterize_obstacle(g, RectShape{1.5, 1.0, 0.5, 0.5});
    const PotentialSolution sol = solve_potential(g, m, basic_fs());
    const int ny = 32;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i <= 64; ++i) {
            CHECK(sol.u(i, j) ==
                  doctest::Approx(sol.u(i, ny - 1 - j)).epsilon(1e-5));
        }
    }
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i < 64; ++i) {
            CHECK(sol.v(i, j) ==
                  doctest::Approx(-sol.v(i, ny - j)).scale(1.0).epsilon(1e-5));
        }
    }
}

TEST_CASE("potential: flow slows ahead of the body and speeds past it") {
    const Grid g = make_grid(GridSpec{64, 32, 4.0, 2.0});
    const ObstacleMask m =
        rasterize_obstacle(g, RectShape{1.5, 1.0, 0.5, 0.5});
    const FreestreamConditions fs = basic_fs();
    const PotentialSolution sol = solve_potential(g, m, fs);
    // Just upstream of the front face (i = 19, center row 15/16).
    CHECK(center_speed(sol, 18, 15) < fs.u_inf);
    // Beside the body (row above the block, same columns).
    CHECK(center_speed(sol, 23, 29) > fs.u_inf);
    // Bernoulli: slower flow means positive pressure, faster means negative.
    CHECK(sol.p(18, 15) > 0.0);
    CHECK(sol.p(23, 29) < 0.0);
    // Solid cells carry zero pressure by convention.
    CHECK(sol.p(23, 15) == 0.0);
    CHECK(sol.residual_history.size() >= 1);
    CHECK(sol.iterations >= 1);
}

TEST_CASE("potential: speed clamp caps faces and rebuilds the pressure") {
    const Grid g = make_grid(GridSpec{64, 32, 4.0, 2.0});
    const ObstacleMask m =
        rasterize_obstacle(g, RectShape{1.5, 1.0, 0.5, 0.5});
    const FreestreamConditions fs = basic_fs();
    PotentialSolution sol = solve_potential(g, m, fs);
    // Force an absurd local speed so the clamp has real work to do.
    for (int j = 12; j < 20; ++j) sol.u(30, j) *= 50.0;
    clamp_potential_speed(sol, g, m, fs, 4.0);

    const double limit = 4.0 * fs.u_inf;
    double max_speed = 0.0;
    for (int j = 0; j < 32; ++j) {
        for (int i = 0; i < 64; ++i) {
            if (m.is_solid(i, j)) continue;
            max_speed = std::max(max_speed, center_speed(sol, i, j));
        }
    }
    // Face-level capping bounds center averages by the same limit.
    CHECK(max_speed <= limit * (1.0 + 1e-9));

    // Pressure must be the dynamic-head deficit of the clamped speeds.
    for (int j = 0; j < 32; ++j) {
        for (int i = 0; i < 64; ++i) {
            if (m.is_solid(i, j)) {
                CHECK(sol.p(i, j) == 0.0);
                continue;
            }
            const double uc = 0.5 * (sol.u(i, j) + sol.u(i + 1, j));
            const double vc = 0.5 * (sol.v(i, j) + sol.v(i, j + 1));
            const double expect =
                0.5 * fs.rho * (fs.u_inf * fs.u_inf - uc * uc - vc * vc);
            CHECK(sol.p(i, j) == doctest::Approx(expect).scale(1.0));
        }
    }

    // Clamping an already-clamped field is a no-op.
    PotentialSolution again = sol;
    clamp_potential_speed(again, g, m, fs, 4.0);
    for (int j = 0; j < 32; ++j) {
        for (int i = 0; i <= 64; ++i) CHECK(again.u(i, j) == sol.u(i, j));
    }
}
