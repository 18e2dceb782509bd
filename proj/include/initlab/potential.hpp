#pragma once

#include <stdexcept>
#include <vector>

#include "initlab/grid.hpp"
#include "initlab/poisson.hpp"

namespace initlab {

struct PotentialOptions {
    double tol = 1e-8;      ///< relative l2 residual target
    int max_iters = 50000;
};

/// Irrotational incompressible flow around the obstacle: the velocity
/// potential satisfies a Laplace equation with prescribed normal flow u_inf
/// at inlet and outlet and zero normal flow on walls and solid faces.
struct PotentialSolution {
    Field2D phi;  ///< cell-centered potential
    Field2D u;    ///< (nx+1) x ny face velocities
    Field2D v;    ///< nx x (ny+1)
    Field2D p;    ///< static pressure from the dynamic-head deficit
    int iterations = 0;
    std::vector<double> residual_history;  ///< relative l2 per iteration
};

/// Solves the potential problem with conjugate gradients on the five-point
/// operator.  Throws PoissonError (with residual history) when the solve does
/// not reach tolerance, and InvalidArgument on malformed inputs.
PotentialSolution solve_potential(const Grid& grid, const ObstacleMask& mask,
                                  const FreestreamConditions& fs,
                                  const PotentialOptions& options = {});

/// Stair-step corners concentrate speed without bound as the grid refines;
/// before a potential solution seeds a simulation its face speeds are capped
/// at limit_factor * u_inf (direction preserved) and the pressure is rebuilt
/// from the capped speeds.
void clamp_potential_speed(PotentialSolution& sol, const Grid& grid,
                           const ObstacleMask& mask,
                           const FreestreamConditions& fs,
                           double limit_factor = 4.0);

}  // namespace initlab
