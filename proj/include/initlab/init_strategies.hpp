#pragma once

#include <optional>
#include <string>
#include <vector>

#include "initlab/grid.hpp"
#include "initlab/io.hpp"

namespace initlab {

// ---- inverse-distance interpolation -----------------------------------------

struct IdwParams {
    double power = 2.0;
    int k_nearest = 8;
    /// Weight regularizer added to d^power; callers that interpolate over a
    /// flow domain pass 1e-12 * (domain diagonal)^2.
    double eps = 0.0;
};

/// K-nearest Shepard interpolator over a fixed point cloud, backed by a
/// uniform-bin spatial index (brute force below 64 points).
class IdwInterpolator {
  public:
    IdwInterpolator(std::vector<double> xs, std::vector<double> ys,
                    const IdwParams& params);

    /// Fills the indices and normalized weights of the k_nearest closest
    /// points.  A zero-distance hit collapses to that point with weight 1.
    void query(double x, double y, std::vector<int>& idx,
               std::vector<double>& w) const;

    /// Weighted average of one value channel (aligned with the point order).
    double interpolate(double x, double y,
                       const std::vector<double>& values) const;

    int size() const { return static_cast<int>(xs_.size()); }

  private:
    void best_k(double x, double y,
                std::vector<std::pair<double, int>>& best) const;

    std::vector<double> xs_;
    std::vector<double> ys_;
    IdwParams params_;
    bool brute_ = true;
    double bin_x0_ = 0.0;
    double bin_y0_ = 0.0;
    double bin_size_ = 1.0;
    int bin_nx_ = 0;
    int bin_ny_ = 0;
    std::vector<int> bin_offset_;  ///< CSR offsets, size bin_nx*bin_ny + 1
    std::vector<int> bin_ids_;     ///< point ids grouped by bin
};

/// One-shot Shepard interpolation: weights 1/(d^power + eps) over the
/// k_nearest closest points, exact at coincident points.
double idw_interpolate(const std::vector<double>& xs,
                       const std::vector<double>& ys,
                       const std::vector<double>& values, double qx, double qy,
                       double power, int k_nearest, double eps);

// ---- blending ---------------------------------------------------------------

struct BlendParams {
    double k_inf = 0.0;
    double k_lower = 0.0;
    double k_upper = 0.0;

    /// k_lower = 1.5 k_inf, k_upper = 3 k_inf.
    static BlendParams defaults(double k_inf) {
        return BlendParams{k_inf, 1.5 * k_inf, 3.0 * k_inf};
    }
};

void validate_blend(const BlendParams& bp);

/// sin^2((pi/2) * clip((k - k_lower) / (k_upper - k_lower), 0, 1)):
/// 0 below k_lower, 1 above k_upper, smooth and monotone between.
double blend_alpha(double k, const BlendParams& bp);

// ---- surrogate helpers ------------------------------------------------------

/// Checks the point-cloud invariants: at least 4 points, k >= 0 everywhere,
/// every point inside the bounding box.
void validate_surrogate(const SurrogateData& data);

/// Turbulence proxy from local rotation: max(k_inf, 0.05 * omega^2 * delta^2).
double k_from_vorticity(double omega, double delta, double k_inf);

/// Runs the same case on an nx/factor x ny/factor grid from a potential-flow
/// start for a few flow-through times and samples the final coarse state at
/// cell centers inside a near-field box around the obstacle (1.5 obstacle
/// lengths upstream and lateral, 4 downstream).  The instantaneous end state
/// is used so a developed wake keeps its asymmetry.
SurrogateData build_proxy_surrogate(const Grid& grid, const ObstacleMask& mask,
                                    const FreestreamConditions& fs, int factor);

// ---- initialization strategies ----------------------------------------------

/// Freestream everywhere: u = u_inf, v = 0, p = 0, k = k_inf.
FlowState init_uniform(const Grid& grid, const ObstacleMask& mask,
                       const FreestreamConditions& fs);

/// Potential-flow velocity and Bernoulli pressure (speed capped at 4 u_inf),
/// uniform k = k_inf.
FlowState init_potential(const Grid& grid, const ObstacleMask& mask,
                         const FreestreamConditions& fs);

/// Loads a snapshot as the starting state (bilinear interpolation when the
/// resolution differs); drop_k replaces the stored k with uniform k_inf.
/// The returned state starts at t = 0.
FlowState init_prior_solution(const Grid& grid, const ObstacleMask& mask,
                              const FreestreamConditions& fs,
                              const std::string& path, bool drop_k = false);

/// Surrogate values inside its box, exact freestream outside; the seam is
/// left as-is.
FlowState extend_surrogate_uniform(const SurrogateData& s, const Grid& grid,
                                   const ObstacleMask& mask,
                                   const FreestreamConditions& fs,
                                   const IdwParams& params = {});

/// Adds boundary points along the domain edges (one per seed_stride cells,
/// carrying inlet / outlet / slip-wall values) and interpolates everywhere
/// over the merged cloud.
FlowState extend_surrogate_idw(const SurrogateData& s, const Grid& grid,
                               const ObstacleMask& mask,
                               const FreestreamConditions& fs,
                               const IdwParams& params = {},
                               int seed_stride = 4);

/// Per-location blend a * idw_extension + (1 - a) * potential_init with
/// a = blend_alpha evaluated from the extension's k at that location.
FlowState init_surrogate_hybrid(const SurrogateData& s, const Grid& grid,
                                const ObstacleMask& mask,
                                const FreestreamConditions& fs,
                                const BlendParams& bp,
                                const IdwParams& params = {},
                                int seed_stride = 4);

// ---- strategy descriptor ----------------------------------------------------

enum class StrategyKind {
    kUniform,
    kPotential,
    kPrior,
    kSurrogateUniform,
    kSurrogateIdw,
    kSurrogateHybrid,
};

struct InitStrategy {
    StrategyKind kind = StrategyKind::kUniform;
    std::string prior_path;                 ///< kPrior
    bool prior_drop_k = false;              ///< kPrior: uniform-k variant
    std::optional<BlendParams> blend;       ///< kSurrogateHybrid override
    int seed_stride = 4;                    ///< kSurrogateIdw / kSurrogateHybrid
};

bool strategy_needs_surrogate(StrategyKind kind);
std::string strategy_name(StrategyKind kind);

/// Dispatches to the strategy implementations.  `surrogate` may be null for
/// strategies that do not need one.
FlowState make_initial_state(const InitStrategy& strategy, const Grid& grid,
                             const ObstacleMask& mask,
                             const FreestreamConditions& fs,
                             const SurrogateData* surrogate);

}  // namespace initlab
