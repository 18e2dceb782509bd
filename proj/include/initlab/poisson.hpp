#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace initlab {

/// Boundary treatment for one edge of the rectangular domain.
///   kNeumann       zero normal gradient (prescribed-flux data goes in b)
///   kDirichletFace field value 0 on the boundary face itself
///   kPeriodic      wraps to the opposite edge
enum class EdgeCondition { kNeumann, kDirichletFace, kPeriodic };

/// Cell-centered five-point problem description: -div(grad x) = b on the
/// fluid cells of an nx x ny grid.
struct PoissonProblem {
    int nx = 0;
    int ny = 0;
    double dx = 0.0;
    double dy = 0.0;
    std::vector<std::uint8_t> solid;  ///< nx*ny flags; empty = all fluid
    EdgeCondition x_lo = EdgeCondition::kNeumann;
    EdgeCondition x_hi = EdgeCondition::kNeumann;
    EdgeCondition y_lo = EdgeCondition::kNeumann;
    EdgeCondition y_hi = EdgeCondition::kNeumann;
};

/// Thrown when an iterative solve fails to reach tolerance.  Carries the
/// residual history so callers can report how the solve behaved.
class PoissonError : public std::runtime_error {
public:
    PoissonError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

/// The operator A = -div(grad) assembled as per-cell neighbor tables.  Solid
/// cells become identity rows decoupled from the rest, so loops can run
/// branch-free over the whole array.
struct StencilOperator {
    int nx = 0;
    int ny = 0;
    double dx = 0.0;
    double dy = 0.0;
    std::vector<std::int32_t> nbr;   ///< 4 entries per cell (self when dropped)
    std::vector<double> coef;        ///< 4 entries per cell (0 when dropped)
    std::vector<double> diag;
    std::vector<std::uint8_t> fluid; ///< 1 = fluid cell
    long fluid_count = 0;
    bool singular = false;           ///< no Dirichlet coupling anywhere

    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    void apply(const std::vector<double>& x, std::vector<double>& ax) const;
    /// r = b - A x; returns max-norm of r over fluid cells.
    double residual(const std::vector<double>& b, const std::vector<double>& x,
                    std::vector<double>& r) const;
    double mean_over_fluid(const std::vector<double>& x) const;
    void subtract_mean(std::vector<double>& x) const;
};

StencilOperator build_stencil(const PoissonProblem& problem);

/// Geometric multigrid (V-cycles, red-black Gauss-Seidel smoothing).  Levels
/// are built once per problem; solves reuse them.
class MultigridPoisson {
public:
    explicit MultigridPoisson(const PoissonProblem& problem);

    /// Solves A x = b in place, using the incoming x as initial guess.
    /// Stops once the max-norm residual over fluid cells is <= tol_abs.
    /// Throws PoissonError if max_cycles V-cycles do not get there.
    /// Returns the number of cycles used.
    int solve(const std::vector<double>& b, std::vector<double>& x,
              double tol_abs, int max_cycles = 200);

    double last_residual() const { return last_residual_; }
    const StencilOperator& fine() const { return levels_.front().op; }

private:
    struct Level {
        StencilOperator op;
        std::vector<double> b, x, r;
    };

    static void smooth(Level& lv, int sweeps);
    void cycle(std::size_t depth);

    std::vector<Level> levels_;
    double last_residual_ = 0.0;
};

/// Jacobi-preconditioned conjugate gradients on the stencil operator.
/// Stops when both the relative l2 residual is <= rel_tol and, when
/// abs_inf_tol > 0, the max-norm residual is <= abs_inf_tol.  For singular
/// (all-Neumann) problems the constant nullspace is projected out.
/// Appends the relative l2 residual per iteration to `history` if given.
/// Throws PoissonError on non-convergence.  Returns iterations used.
int solve_cg(const StencilOperator& op, const std::vector<double>& b,
             std::vector<double>& x, double rel_tol, double abs_inf_tol,
             int max_iters, std::vector<double>* history = nullptr);

}  // namespace initlab
