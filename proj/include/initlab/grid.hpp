#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "initlab/field.hpp"

namespace initlab {

/// Thrown when a domain type is constructed from invalid inputs.  The message
/// names the offending type and constraint.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Uniform Cartesian grid description.  Velocities live on faces (MAC
/// staggering), pressure and the k scalar at cell centers.
struct GridSpec {
    int nx = 0;        ///< cell count in x
    int ny = 0;        ///< cell count in y
    double lx = 0.0;   ///< domain length in x [m]
    double ly = 0.0;   ///< domain length in y [m]
};

struct Grid {
    GridSpec spec;
    double dx = 0.0;
    double dy = 0.0;

    double x_center(int i) const { return (i + 0.5) * dx; }
    double y_center(int j) const { return (j + 0.5) * dy; }
    double x_face(int i) const { return i * dx; }
    double y_face(int j) const { return j * dy; }
};

/// Validates a GridSpec and derives cell sizes.  Throws InvalidArgument on
/// nx/ny < 8, non-positive extents, or cell counts beyond the supported cap.
Grid make_grid(const GridSpec& spec);

/// Axis-aligned rectangle, described by center and side lengths.
struct RectShape {
    double cx = 0.0;
    double cy = 0.0;
    double width = 0.0;
    double height = 0.0;
};

struct CircleShape {
    double cx = 0.0;
    double cy = 0.0;
    double radius = 0.0;
};

using ShapeSpec = std::variant<RectShape, CircleShape>;

/// Longest axis-aligned extent of the shape; used as the obstacle length scale.
double shape_length(const ShapeSpec& shape);

/// Rasterized obstacle: a cell is solid iff its center lies inside the shape.
struct ObstacleMask {
    int nx = 0;
    int ny = 0;
    std::vector<std::uint8_t> solid;                 ///< nx*ny, 1 = solid
    std::vector<std::pair<int, int>> boundary_cells; ///< fluid cells with a solid 4-neighbor

    bool is_solid(int i, int j) const {
        if (i < 0 || i >= nx || j < 0 || j >= ny) return false;
        return solid[static_cast<std::size_t>(j) * nx + i] != 0;
    }
};

/// Stair-step rasterization by cell-center containment.  Throws if the shape
/// rasterizes to no cells, or sits closer than two cells to any domain edge.
ObstacleMask rasterize_obstacle(const Grid& grid, const ShapeSpec& shape);

/// Far-field flow conditions driving the case.
struct FreestreamConditions {
    double u_inf = 0.0;   ///< inflow speed [m/s]
    double rho = 0.0;     ///< density [kg/m^3]
    double nu = 0.0;      ///< kinematic viscosity [m^2/s]
    double k_inf = 0.0;   ///< background k level [m^2/s^2]
    double l0 = 0.0;      ///< reference length for convective time units [m]
};

/// Validates freestream values (positive u_inf, rho, nu, l0; k_inf >= 0).
void validate_freestream(const FreestreamConditions& fs);

/// Staggered flow state.  u is (nx+1) x ny on x-faces, v is nx x (ny+1) on
/// y-faces, p and k are nx x ny at centers.
struct FlowState {
    Field2D u;
    Field2D v;
    Field2D p;
    Field2D k;
    double t = 0.0;

    static FlowState zeros(const Grid& grid);
};

/// Throws InvalidArgument if shapes disagree with the grid, any value is
/// non-finite, or k is negative anywhere.
void validate_state(const Grid& grid, const FlowState& state);

/// Overwrites boundary and solid values in place:
///   - inlet (left) u-faces set to u_inf,
///   - top/bottom wall v-faces set to zero (slip walls: no penetration),
///   - every face of a solid cell set to zero (no-slip obstacle).
/// Outlet values are governed by zero-gradient ghosts inside the solver and
/// are not touched here.  Idempotent: applying twice is bit-identical.
void apply_boundary_conditions(const Grid& grid, const ObstacleMask& mask,
                               const FreestreamConditions& fs, FlowState& state);

/// Interpolate staggered velocities to a cell center.
inline double u_at_center(const Field2D& u, int i, int j) {
    return 0.5 * (u(i, j) + u(i + 1, j));
}
inline double v_at_center(const Field2D& v, int i, int j) {
    return 0.5 * (v(i, j) + v(i, j + 1));
}

}  // namespace initlab
