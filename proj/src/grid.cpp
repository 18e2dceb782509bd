#include "initlab/grid.hpp"

#include <cmath>
#include <sstream>

namespace initlab {

namespace {

constexpr long kMaxCells = 4'000'000;

[[noreturn]] void fail(const std::string& what) {
    throw InvalidArgument(what);
}

bool contains(const ShapeSpec& shape, double x, double y) {
    if (const auto* r = std::get_if<RectShape>(&shape)) {
        return std::abs(x - r->cx) < 0.5 * r->width &&
               std::abs(y - r->cy) < 0.5 * r->height;
    }
    const auto& c = std::get<CircleShape>(shape);
    const double ddx = x - c.cx;
    const double ddy = y - c.cy;
    return ddx * ddx + ddy * ddy < c.radius * c.radius;
}

void shape_bounds(const ShapeSpec& shape, double& xmin, double& xmax,
                  double& ymin, double& ymax) {
    if (const auto* r = std::get_if<RectShape>(&shape)) {
        xmin = r->cx - 0.5 * r->width;
        xmax = r->cx + 0.5 * r->width;
        ymin = r->cy - 0.5 * r->height;
        ymax = r->cy + 0.5 * r->height;
        return;
    }
    const auto& c = std::get<CircleShape>(shape);
    xmin = c.cx - c.radius;
    xmax = c.cx + c.radius;
    ymin = c.cy - c.radius;
    ymax = c.cy + c.radius;
}

}  // namespace

Grid make_grid(const GridSpec& spec) {
    if (spec.nx < 8 || spec.ny < 8) {
        std::ostringstream os;
        os << "GridSpec: nx and ny must be >= 8 (got nx=" << spec.nx
           << ", ny=" << spec.ny << ")";
        fail(os.str());
    }
    if (!(spec.lx > 0.0) || !(spec.ly > 0.0)) {
        fail("GridSpec: lx and ly must be positive");
    }
    if (static_cast<long>(spec.nx) * spec.ny > kMaxCells) {
        std::ostringstream os;
        os << "GridSpec: nx*ny=" << static_cast<long>(spec.nx) * spec.ny
           << " exceeds the supported cap of " << kMaxCells << " cells";
        fail(os.str());
    }
    Grid g;
    g.spec = spec;
    g.dx = spec.lx / spec.nx;
    g.dy = spec.ly / spec.ny;
    return g;
}

double shape_length(const ShapeSpec& shape) {
    if (const auto* r = std::get_if<RectShape>(&shape)) {
        return std::max(r->width, r->height);
    }
    return 2.0 * std::get<CircleShape>(shape).radius;
}

ObstacleMask rasterize_obstacle(const Grid& grid, const ShapeSpec& shape) {
    if (const auto* r = std::get_if<RectShape>(&shape)) {
        if (!(r->width > 0.0) || !(r->height > 0.0)) {
            fail("ShapeSpec: rectangle width and height must be positive");
        }
    } else if (!(std::get<CircleShape>(shape).radius > 0.0)) {
        fail("ShapeSpec: circle radius must be positive");
    }

    double xmin, xmax, ymin, ymax;
    shape_bounds(shape, xmin, xmax, ymin, ymax);
    const double cx = 2.0 * grid.dx;  // required clearance to the domain edge
    const double cy = 2.0 * grid.dy;
    if (xmin < cx || xmax > grid.spec.lx - cx || ymin < cy ||
        ymax > grid.spec.ly - cy) {
        fail("ShapeSpec: obstacle must lie strictly inside the domain with at "
             "least two cells of clearance to every boundary");
    }

    ObstacleMask mask;
    mask.nx = grid.spec.nx;
    mask.ny = grid.spec.ny;
    mask.solid.assign(static_cast<std::size_t>(mask.nx) * mask.ny, 0);

    int count = 0;
    for (int j = 0; j < mask.ny; ++j) {
        for (int i = 0; i < mask.nx; ++i) {
            if (contains(shape, grid.x_center(i), grid.y_center(j))) {
                mask.solid[static_cast<std::size_t>(j) * mask.nx + i] = 1;
                ++count;
            }
        }
    }
    if (count == 0) {
        fail("ShapeSpec: obstacle rasterizes to no cells on this grid");
    }

    for (int j = 0; j < mask.ny; ++j) {
        for (int i = 0; i < mask.nx; ++i) {
            if (mask.is_solid(i, j)) continue;
            if (mask.is_solid(i - 1, j) || mask.is_solid(i + 1, j) ||
                mask.is_solid(i, j - 1) || mask.is_solid(i, j + 1)) {
                mask.boundary_cells.emplace_back(i, j);
            }
        }
    }
    return mask;
}

void validate_freestream(const FreestreamConditions& fs) {
    if (!(fs.u_inf > 0.0)) fail("FreestreamConditions: u_inf must be positive");
    if (!(fs.rho > 0.0)) fail("FreestreamConditions: rho must be positive");
    if (!(fs.nu > 0.0)) fail("FreestreamConditions: nu must be positive");
    if (!(fs.k_inf >= 0.0)) fail("FreestreamConditions: k_inf must be >= 0");
    if (!(fs.l0 > 0.0)) fail("FreestreamConditions: l0 must be positive");
}

FlowState FlowState::zeros(const Grid& grid) {
    FlowState s;
    const int nx = grid.spec.nx;
    const int ny = grid.spec.ny;
    s.u = Field2D(nx + 1, ny);
    s.v = Field2D(nx, ny + 1);
    s.p = Field2D(nx, ny);
    s.k = Field2D(nx, ny);
    return s;
}

void validate_state(const Grid& grid, const FlowState& state) {
    const int nx = grid.spec.nx;
    const int ny = grid.spec.ny;
    if (state.u.nx() != nx + 1 || state.u.ny() != ny ||
        state.v.nx() != nx || state.v.ny() != ny + 1 ||
        state.p.nx() != nx || state.p.ny() != ny ||
        state.k.nx() != nx || state.k.ny() != ny) {
        fail("FlowState: field shapes do not match the staggered layout for "
             "this grid");
    }
    auto check_finite = [](const Field2D& f, const char* name) {
        for (double x : f.raw()) {
            if (!std::isfinite(x)) {
                fail(std::string("FlowState: non-finite value in ") + name);
            }
        }
    };
    check_finite(state.u, "u");
    check_finite(state.v, "v");
    check_finite(state.p, "p");
    check_finite(state.k, "k");
    for (double x : state.k.raw()) {
        if (x < 0.0) fail("FlowState: k must be non-negative everywhere");
    }
    if (!std::isfinite(state.t)) fail("FlowState: non-finite time");
}

void apply_boundary_conditions(const Grid& grid, const ObstacleMask& mask,
                               const FreestreamConditions& fs, FlowState& state) {
    const int nx = grid.spec.nx;
    const int ny = grid.spec.ny;

    for (int j = 0; j < ny; ++j) {
        state.u(0, j) = fs.u_inf;  // inlet Dirichlet
    }
    for (int i = 0; i < nx; ++i) {
        state.v(i, 0) = 0.0;   // bottom slip wall: no penetration
        state.v(i, ny) = 0.0;  // top slip wall
    }
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (!mask.is_solid(i, j)) continue;
            state.u(i, j) = 0.0;
            state.u(i + 1, j) = 0.0;
            state.v(i, j) = 0.0;
            state.v(i, j + 1) = 0.0;
        }
    }
}

}  // namespace initlab
