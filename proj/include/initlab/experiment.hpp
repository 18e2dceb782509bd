#pragma once

#include <optional>
#include <string>
#include <vector>

#include "initlab/grid.hpp"
#include "initlab/init_strategies.hpp"
#include "initlab/solver.hpp"

namespace initlab {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Fully parsed experiment description: the case geometry and flow, the
/// solver settings, the strategy list and the output layout.
struct ExperimentConfig {
    GridSpec grid;
    ShapeSpec shape = RectShape{};
    FreestreamConditions fs;
    SolverConfig solver;
    std::vector<InitStrategy> strategies;
    std::optional<BlendParams> blend;    ///< default derives from k_inf

    bool surrogate_from_file = false;
    std::string surrogate_path;
    int surrogate_factor = 4;

    std::string output_dir;
    double tol = 0.01;
    long seed = 0;                       ///< reserved; runs are deterministic
    int seed_stride = 4;
    IdwParams idw;

    /// Divergence-free-ish lateral kick downstream of the obstacle, applied
    /// identically to every strategy so shedding starts at the same place.
    double perturb_amp = 0.0;

    bool snapshot_final = false;
    bool snapshot_time_average = false;
    bool parallel = false;
};

/// Parses the flat-section `key = value` config format.  Unknown sections or
/// keys are rejected with their line number; invariant violations name the
/// offending field.
ExperimentConfig parse_config(const std::string& text,
                              const std::string& filename);
ExperimentConfig load_config(const std::string& path);

struct StrategyResult {
    std::string name;
    bool ok = false;
    std::string error;
    double init_seconds = 0.0;
    double t_conv = 0.0;
    double t_conv_ctu = 0.0;
    double solve_seconds_to_conv = 0.0;
    double solve_seconds_total = 0.0;
    double final_filtered = 0.0;
};

struct ComparisonTable {
    std::vector<StrategyResult> rows;

    bool all_ok() const;
    const StrategyResult* find(const std::string& name) const;
};

/// Runs every strategy through the solver, writes per-strategy series CSVs
/// and optional snapshots under output_dir/<strategy>/, then the comparison
/// table (deterministic CSV + aligned text + wall-clock CSV) and the overlay
/// plots.  Individual strategy failures are recorded as failed rows; the
/// other strategies still run.
ComparisonTable run_experiment(const ExperimentConfig& cfg);

/// Re-reads the per-strategy series under output_dir and writes
/// force_raw.svg / force_filtered.svg with a star at each recomputed
/// convergence time.  Strategies without series are listed in
/// plot_warnings.log.  Throws IoError when no series exist at all.
void emit_plots(const std::string& output_dir);

/// Parallelism cap: INITLAB_THREADS when set (>= 1), else the hardware
/// concurrency.
int thread_cap();

}  // namespace initlab
