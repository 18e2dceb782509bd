#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "initlab/grid.hpp"
#include "initlab/poisson.hpp"

namespace initlab {

/// Time stepping and projection settings.
struct SolverConfig {
    double dt = 0.0;
    double t_end = 0.0;
    double cfl_limit = 0.9;
    double poisson_tol = 1e-7;  ///< divergence bound scale, see project()
    int n_correctors = 2;       ///< pressure corrector passes per step
    int sample_every = 1;       ///< force sampling stride in steps
};

/// Throws InvalidArgument naming the field that violates its constraint.
void validate_solver_config(const SolverConfig& cfg);

/// Thrown when the advective CFL number exceeds the configured limit.
class CflError : public std::runtime_error {
public:
    CflError(const std::string& what, int i, int j, double value)
        : std::runtime_error(what), cell_i(i), cell_j(j), cfl(value) {}
    int cell_i;
    int cell_j;
    double cfl;
};

struct Forces {
    double fx = 0.0;  ///< per unit depth [N/m]
    double fy = 0.0;
};

struct ForceSample {
    double t = 0.0;
    double fx = 0.0;
    double fy = 0.0;
};

struct ForceSeries {
    std::vector<ForceSample> samples;
};

/// Domain treatment.  kFreestream is the production configuration (inlet /
/// outlet / slip walls / obstacle).  kPeriodic turns every edge periodic and
/// exists for verification against closed-form solutions.
enum class DomainMode { kFreestream, kPeriodic };

struct RunOptions {
    /// When >= 0, accumulate a time average of all states with t >= value.
    double time_average_start = -1.0;
    /// Verify the post-step divergence bound every step (testing aid).
    bool check_divergence = false;
    /// Fires once per entry when simulation time reaches it.
    std::vector<double> snapshot_times;
    std::function<void(const FlowState&)> on_snapshot;
    /// Fires for every recorded force sample, in order.
    std::function<void(const ForceSample&)> on_sample;
};

struct RunResult {
    ForceSeries series;
    FlowState final_state;
    std::optional<FlowState> time_average;
    long steps = 0;
};

/// Explicit incompressible solver on the staggered grid: two-stage
/// second-order predictor with central advection and diffusion, pressure
/// projection after each stage, upwinded passive k transport with linear
/// relaxation toward k_inf.
class TransientSolver {
public:
    TransientSolver(const Grid& grid, const ObstacleMask& mask,
                    const FreestreamConditions& fs, const SolverConfig& cfg,
                    DomainMode mode = DomainMode::kFreestream);
    ~TransientSolver();

    TransientSolver(const TransientSolver&) = delete;
    TransientSolver& operator=(const TransientSolver&) = delete;

    /// Advances the state by one dt.  Post: divergence bound as in project().
    void step(FlowState& state);

    /// Projects (u, v) onto a discretely divergence-free field.  Post: the
    /// max-norm divergence over fluid cells is <= poisson_tol * u_inf / dx.
    void project(FlowState& state);

    /// Pressure and viscous-shear force on the obstacle per unit depth.
    Forces compute_force(const FlowState& state) const;

    /// Advective CFL number: max over cells of |u| dt / dx + |v| dt / dy.
    double cfl_number(const FlowState& state) const;

    /// Marches from state.t to cfg.t_end, sampling forces every
    /// cfg.sample_every steps.  The CFL precondition is checked before every
    /// step and a violation raises CflError naming the worst cell.
    RunResult run(FlowState initial, const RunOptions& options = {});

    const Grid& grid() const { return grid_; }
    const ObstacleMask& mask() const { return mask_; }
    const FreestreamConditions& freestream() const { return fs_; }
    const SolverConfig& config() const { return cfg_; }

private:
    struct Workspace;

    void fill_velocity_ghosts(const Field2D& u, const Field2D& v);
    void fill_scalar_ghosts(const Field2D& k);
    void momentum_rhs(const Field2D& u, const Field2D& v, Field2D& du,
                      Field2D& dv);
    void scalar_rhs(const Field2D& u, const Field2D& v, const Field2D& k,
                    Field2D& dk);
    void project_velocity(Field2D& u, Field2D& v, std::vector<double>& phi);
    void apply_bcs(FlowState& state) const;
    void cfl_worst(const FlowState& state, double& worst, int& wi,
                   int& wj) const;

    Grid grid_;
    ObstacleMask mask_;
    FreestreamConditions fs_;
    SolverConfig cfg_;
    DomainMode mode_;
    std::unique_ptr<Workspace> ws_;
};

/// Discrete divergence over fluid cells; zero in solid cells.
Field2D divergence_field(const Grid& grid, const ObstacleMask& mask,
                         const Field2D& u, const Field2D& v);
double max_divergence(const Grid& grid, const ObstacleMask& mask,
                      const Field2D& u, const Field2D& v);

/// p + rho/2 * |U|^2 sampled at cell centers.
Field2D total_pressure(const Grid& grid, const FreestreamConditions& fs,
                       const FlowState& state);

/// Converts a time to convective time units: t * u_inf / l0.
double to_ctu(double t, const FreestreamConditions& fs);

}  // namespace initlab
