#include "initlab/potential.hpp"

#include <cmath>

namespace initlab {

PotentialSolution solve_potential(const Grid& grid, const ObstacleMask& mask,
                                  const FreestreamConditions& fs,
                                  const PotentialOptions& options) {
    validate_freestream(fs);
    if (!(options.tol > 0.0)) {
        throw InvalidArgument("PotentialOptions: tol must be positive");
    }
    const int nx = grid.spec.nx;
    const int ny = grid.spec.ny;
    if (mask.nx != nx || mask.ny != ny) {
        throw InvalidArgument("solve_potential: mask does not match the grid");
    }

    PoissonProblem pb;
    pb.nx = nx;
    pb.ny = ny;
    pb.dx = grid.dx;
    pb.dy = grid.dy;
    pb.solid = mask.solid;
    pb.x_lo = pb.x_hi = pb.y_lo = pb.y_hi = EdgeCondition::kNeumann;
    const StencilOperator op = build_stencil(pb);

    // Prescribed normal flow enters the right-hand side: u_inf into the
    // domain at the inlet column, u_inf out of it at the outlet column.
    std::vector<double> b(op.size(), 0.0);
    for (int j = 0; j < ny; ++j) {
        const std::size_t left = static_cast<std::size_t>(j) * nx;
        const std::size_t right = left + (nx - 1);
        if (op.fluid[left]) b[left] = -fs.u_inf / grid.dx;
        if (op.fluid[right]) b[right] += fs.u_inf / grid.dx;
    }

    PotentialSolution sol;
    sol.phi = Field2D(nx, ny);
    // The divergence of the reconstructed velocity equals the solve residual,
    // so cap its max norm well inside the advertised bound.
    const double abs_inf_tol = 5.0 * options.tol * fs.u_inf / grid.dx;
    sol.iterations = solve_cg(op, b, sol.phi.raw(), options.tol, abs_inf_tol,
                              options.max_iters, &sol.residual_history);

    sol.u = Field2D(nx + 1, ny);
    sol.v = Field2D(nx, ny + 1);
    for (int j = 0; j < ny; ++j) {
        sol.u(0, j) = fs.u_inf;
        sol.u(nx, j) = fs.u_inf;
        for (int i = 1; i < nx; ++i) {
            if (mask.is_solid(i - 1, j) || mask.is_solid(i, j)) continue;
            sol.u(i, j) = (sol.phi(i, j) - sol.phi(i - 1, j)) / grid.dx;
        }
    }
    for (int i = 0; i < nx; ++i) {
        for (int j = 1; j < ny; ++j) {
            if (mask.is_solid(i, j - 1) || mask.is_solid(i, j)) continue;
            sol.v(i, j) = (sol.phi(i, j) - sol.phi(i, j - 1)) / grid.dy;
        }
    }

    sol.p = Field2D(nx, ny);
    const double q_inf = fs.u_inf * fs.u_inf;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (mask.is_solid(i, j)) continue;
            const double uc = u_at_center(sol.u, i, j);
            const double vc = v_at_center(sol.v, i, j);
            sol.p(i, j) = 0.5 * fs.rho * (q_inf - (uc * uc + vc * vc));
        }
    }
    return sol;
}

void clamp_potential_speed(PotentialSolution& sol, const Grid& grid,
                           const ObstacleMask& mask,
                           const FreestreamConditions& fs,
                           double limit_factor) {
    if (!(limit_factor > 0.0)) {
        throw InvalidArgument("clamp_potential_speed: limit_factor must be > 0");
    }
    const int nx = grid.spec.nx;
    const int ny = grid.spec.ny;
    const double limit = limit_factor * fs.u_inf;

    // Each face's speed estimate mixes in neighboring faces, so one scaling
    // pass can leave estimates marginally above the limit once the neighbors
    // shrink too.  Sweep to the fixed point (magnitudes only ever decrease,
    // so this settles in a few passes); afterwards a second clamp is a no-op.
    for (int pass = 0; pass < 64; ++pass) {
        bool changed = false;
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i <= nx; ++i) {
                const int il = std::max(i - 1, 0);
                const int ir = std::min(i, nx - 1);
                const double vt = 0.25 * (sol.v(il, j) + sol.v(il, j + 1) +
                                          sol.v(ir, j) + sol.v(ir, j + 1));
                const double s = std::hypot(sol.u(i, j), vt);
                if (s > limit) {
                    sol.u(i, j) *= limit / s;
                    changed = true;
                }
            }
        }
        for (int j = 0; j <= ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                const int jl = std::max(j - 1, 0);
                const int jr = std::min(j, ny - 1);
                const double ut = 0.25 * (sol.u(i, jl) + sol.u(i + 1, jl) +
                                          sol.u(i, jr) + sol.u(i + 1, jr));
                const double s = std::hypot(ut, sol.v(i, j));
                if (s > limit) {
                    sol.v(i, j) *= limit / s;
                    changed = true;
                }
            }
        }
        if (!changed) break;
    }

    const double q_inf = fs.u_inf * fs.u_inf;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (mask.is_solid(i, j)) {
                sol.p(i, j) = 0.0;
                continue;
            }
            const double uc = u_at_center(sol.u, i, j);
            const double vc = v_at_center(sol.v, i, j);
            sol.p(i, j) = 0.5 * fs.rho * (q_inf - (uc * uc + vc * vc));
        }
    }
}

}  // namespace initlab
