#include "initlab/init_strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "initlab/potential.hpp"
#include "initlab/solver.hpp"

namespace initlab {

namespace {

double domain_eps(const GridSpec& spec) {
    return 1e-12 * (spec.lx * spec.lx + spec.ly * spec.ly);
}

double dot_channel(const std::vector<int>& idx, const std::vector<double>& w,
                   const std::vector<double>& channel) {
    double acc = 0.0;
    for (std::size_t m = 0; m < idx.size(); ++m) {
        acc += w[m] * channel[static_cast<std::size_t>(idx[m])];
    }
    return acc;
}

/// Point cloud with aligned value channels, ready for interpolation.
struct Cloud {
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> p;
    std::vector<double> k;

    void add(double x, double y, double uu, double vv, double pp, double kk) {
        xs.push_back(x);
        ys.push_back(y);
        u.push_back(uu);
        v.push_back(vv);
        p.push_back(pp);
        k.push_back(kk);
    }
};

Cloud cloud_from_surrogate(const SurrogateData& s) {
    Cloud c;
    c.xs.reserve(s.points.size());
    for (const SurrogatePoint& pt : s.points) {
        c.add(pt.x, pt.y, pt.u, pt.v, pt.p, pt.k);
    }
    return c;
}

/// Boundary-condition points along the four domain edges, one per
/// seed_stride cells.  Inlet, outlet and slip walls all advertise the same
/// donor values: u = u_inf, v = 0, p = 0, k = k_inf.
void add_boundary_seeds(Cloud& c, const Grid& grid,
                        const FreestreamConditions& fs, int seed_stride) {
    const GridSpec& sp = grid.spec;
    for (int j = 0; j < sp.ny; j += seed_stride) {
        c.add(0.0, grid.y_center(j), fs.u_inf, 0.0, 0.0, fs.k_inf);
        c.add(sp.lx, grid.y_center(j), fs.u_inf, 0.0, 0.0, fs.k_inf);
    }
    for (int i = 0; i < sp.nx; i += seed_stride) {
        c.add(grid.x_center(i), 0.0, fs.u_inf, 0.0, 0.0, fs.k_inf);
        c.add(grid.x_center(i), sp.ly, fs.u_inf, 0.0, 0.0, fs.k_inf);
    }
}

/// Vorticity dv/dx - du/dy evaluated at grid nodes and averaged to centers.
Field2D center_vorticity(const Grid& grid, const Field2D& u, const Field2D& v) {
    const int nx = grid.spec.nx;
    const int ny = grid.spec.ny;
    Field2D node(nx + 1, ny + 1);
    for (int j = 1; j < ny; ++j) {
        for (int i = 1; i < nx; ++i) {
            const double dvdx = (v(i, j) - v(i - 1, j)) / grid.dx;
            const double dudy = (u(i, j) - u(i, j - 1)) / grid.dy;
            node(i, j) = dvdx - dudy;
        }
    }
    Field2D out(nx, ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            out(i, j) = 0.25 * (node(i, j) + node(i + 1, j) + node(i, j + 1) +
                                node(i + 1, j + 1));
        }
    }
    return out;
}

}  // namespace

// ---- inverse-distance interpolation -----------------------------------------

IdwInterpolator::IdwInterpolator(std::vector<double> xs, std::vector<double> ys,
                                 const IdwParams& params)
    : xs_(std::move(xs)), ys_(std::move(ys)), params_(params) {
    if (xs_.empty() || xs_.size() != ys_.size()) {
        throw InvalidArgument("IdwInterpolator: empty or mismatched point set");
    }
    if (!(params_.power > 0.0)) {
        throw InvalidArgument("IdwInterpolator: power must be positive");
    }
    if (params_.k_nearest < 1) {
        throw InvalidArgument("IdwInterpolator: k_nearest must be >= 1");
    }
    if (params_.eps < 0.0) {
        throw InvalidArgument("IdwInterpolator: eps must be >= 0");
    }

    const std::size_t n = xs_.size();
    brute_ = n < 64;
    if (brute_) return;

    double xmin = xs_[0], xmax = xs_[0], ymin = ys_[0], ymax = ys_[0];
    for (std::size_t m = 1; m < n; ++m) {
        xmin = std::min(xmin, xs_[m]);
        xmax = std::max(xmax, xs_[m]);
        ymin = std::min(ymin, ys_[m]);
        ymax = std::max(ymax, ys_[m]);
    }
    const double span_x = std::max(xmax - xmin, 1e-300);
    const double span_y = std::max(ymax - ymin, 1e-300);
    // Aim for ~2 points per bin.
    bin_size_ = std::sqrt(2.0 * span_x * span_y / static_cast<double>(n));
    if (!(bin_size_ > 0.0)) bin_size_ = 1.0;
    bin_nx_ = std::max(1, static_cast<int>(std::ceil(span_x / bin_size_)));
    bin_ny_ = std::max(1, static_cast<int>(std::ceil(span_y / bin_size_)));
    bin_x0_ = xmin;
    bin_y0_ = ymin;

    const std::size_t n_bins =
        static_cast<std::size_t>(bin_nx_) * static_cast<std::size_t>(bin_ny_);
    std::vector<int> count(n_bins, 0);
    const auto bin_of = [&](double x, double y) {
        int bx = static_cast<int>((x - bin_x0_) / bin_size_);
        int by = static_cast<int>((y - bin_y0_) / bin_size_);
        bx = std::clamp(bx, 0, bin_nx_ - 1);
        by = std::clamp(by, 0, bin_ny_ - 1);
        return static_cast<std::size_t>(by) * bin_nx_ + bx;
    };
    for (std::size_t m = 0; m < n; ++m) ++count[bin_of(xs_[m], ys_[m])];
    bin_offset_.assign(n_bins + 1, 0);
    for (std::size_t b = 0; b < n_bins; ++b) {
        bin_offset_[b + 1] = bin_offset_[b] + count[b];
    }
    bin_ids_.resize(n);
    std::vector<int> cursor(bin_offset_.begin(), bin_offset_.end() - 1);
    for (std::size_t m = 0; m < n; ++m) {
        bin_ids_[static_cast<std::size_t>(cursor[bin_of(xs_[m], ys_[m])]++)] =
            static_cast<int>(m);
    }
}

void IdwInterpolator::best_k(double x, double y,
                             std::vector<std::pair<double, int>>& best) const {
    const int want = std::min<int>(params_.k_nearest,
                                   static_cast<int>(xs_.size()));
    best.clear();
    const auto consider = [&](int id) {
        const double ddx = x - xs_[static_cast<std::size_t>(id)];
        const double ddy = y - ys_[static_cast<std::size_t>(id)];
        const std::pair<double, int> cand{ddx * ddx + ddy * ddy, id};
        if (static_cast<int>(best.size()) < want) {
            best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
        } else if (cand < best.back()) {
            best.pop_back();
            best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
        }
    };

    if (brute_) {
        for (int id = 0; id < static_cast<int>(xs_.size()); ++id) consider(id);
        return;
    }

    const int bx = std::clamp(static_cast<int>((x - bin_x0_) / bin_size_), 0,
                              bin_nx_ - 1);
    const int by = std::clamp(static_cast<int>((y - bin_y0_) / bin_size_), 0,
                              bin_ny_ - 1);
    const auto scan_bin = [&](int cx, int cy) {
        if (cx < 0 || cx >= bin_nx_ || cy < 0 || cy >= bin_ny_) return;
        const std::size_t b = static_cast<std::size_t>(cy) * bin_nx_ + cx;
        for (int s = bin_offset_[b]; s < bin_offset_[b + 1]; ++s) {
            consider(bin_ids_[static_cast<std::size_t>(s)]);
        }
    };
    const int max_ring = std::max(std::max(bx, bin_nx_ - 1 - bx),
                                  std::max(by, bin_ny_ - 1 - by));
    for (int r = 0; r <= max_ring; ++r) {
        if (r == 0) {
            scan_bin(bx, by);
        } else {
            for (int cx = bx - r; cx <= bx + r; ++cx) {
                scan_bin(cx, by - r);
                scan_bin(cx, by + r);
            }
            for (int cy = by - r + 1; cy <= by + r - 1; ++cy) {
                scan_bin(bx - r, cy);
                scan_bin(bx + r, cy);
            }
        }
        if (static_cast<int>(best.size()) >= want) {
            // Everything beyond ring r is at least r * bin_size_ away.
            const double reach = static_cast<double>(r) * bin_size_;
            if (best.back().first <= reach * reach) break;
        }
    }
}

void IdwInterpolator::query(double x, double y, std::vector<int>& idx,
                            std::vector<double>& w) const {
    std::vector<std::pair<double, int>> best;
    best.reserve(static_cast<std::size_t>(params_.k_nearest) + 1);
    best_k(x, y, best);

    idx.clear();
    w.clear();
    if (best.front().first == 0.0) {
        idx.push_back(best.front().second);
        w.push_back(1.0);
        return;
    }
    double total = 0.0;
    for (const auto& [d2, id] : best) {
        const double wd = (params_.power == 2.0)
                              ? 1.0 / (d2 + params_.eps)
                              : 1.0 / (std::pow(std::sqrt(d2), params_.power) +
                                       params_.eps);
        idx.push_back(id);
        w.push_back(wd);
        total += wd;
    }
    const double inv = 1.0 / total;
    for (double& wd : w) wd *= inv;
}

double IdwInterpolator::interpolate(double x, double y,
                                    const std::vector<double>& values) const {
    if (values.size() != xs_.size()) {
        throw InvalidArgument("IdwInterpolator: value channel size mismatch");
    }
    std::vector<int> idx;
    std::vector<double> w;
    query(x, y, idx, w);
    return dot_channel(idx, w, values);
}

double idw_interpolate(const std::vector<double>& xs,
                       const std::vector<double>& ys,
                       const std::vector<double>& values, double qx, double qy,
                       double power, int k_nearest, double eps) {
    if (xs.size() != values.size()) {
        throw InvalidArgument("idw_interpolate: points/values size mismatch");
    }
    IdwParams params;
    params.power = power;
    params.k_nearest = k_nearest;
    params.eps = eps;
    const IdwInterpolator interp(xs, ys, params);
    return interp.interpolate(qx, qy, values);
}

// ---- blending ---------------------------------------------------------------

void validate_blend(const BlendParams& bp) {
    if (!(bp.k_inf >= 0.0) || !(bp.k_lower > bp.k_inf) ||
        !(bp.k_upper > bp.k_lower)) {
        throw InvalidArgument(
            "BlendParams: need 0 <= k_inf < k_lower < k_upper");
    }
}

double blend_alpha(double k, const BlendParams& bp) {
    const double s = (k - bp.k_lower) / (bp.k_upper - bp.k_lower);
    const double c = std::clamp(s, 0.0, 1.0);
    const double sn = std::sin(0.5 * std::numbers::pi * c);
    return sn * sn;
}

// ---- surrogate helpers ------------------------------------------------------

void validate_surrogate(const SurrogateData& data) {
    if (!(data.xmax > data.xmin) || !(data.ymax > data.ymin)) {
        throw InvalidArgument("SurrogateField: degenerate bounding box");
    }
    if (data.points.size() < 4) {
        throw InvalidArgument("SurrogateField: need at least 4 points");
    }
    const double slack =
        1e-12 * std::hypot(data.xmax - data.xmin, data.ymax - data.ymin);
    for (std::size_t m = 0; m < data.points.size(); ++m) {
        const SurrogatePoint& pt = data.points[m];
        if (pt.k < 0.0) {
            throw InvalidArgument("SurrogateField: negative k at point " +
                                  std::to_string(m));
        }
        if (pt.x < data.xmin - slack || pt.x > data.xmax + slack ||
            pt.y < data.ymin - slack || pt.y > data.ymax + slack) {
            throw InvalidArgument("SurrogateField: point " + std::to_string(m) +
                                  " outside the bounding box");
        }
    }
}

double k_from_vorticity(double omega, double delta, double k_inf) {
    return std::max(k_inf, 0.05 * omega * omega * delta * delta);
}

SurrogateData build_proxy_surrogate(const Grid& grid, const ObstacleMask& mask,
                                    const FreestreamConditions& fs,
                                    int factor) {
    validate_freestream(fs);
    if (factor < 2) {
        throw InvalidArgument("build_proxy_surrogate: factor must be >= 2");
    }
    const int nx = grid.spec.nx;
    const int ny = grid.spec.ny;
    if (nx % factor != 0 || ny % factor != 0) {
        throw InvalidArgument(
            "build_proxy_surrogate: factor must divide the grid dimensions");
    }
    const Grid coarse =
        make_grid({nx / factor, ny / factor, grid.spec.lx, grid.spec.ly});
    const int cnx = coarse.spec.nx;
    const int cny = coarse.spec.ny;

    // Coarse cell is solid when its center lands in a solid fine cell.
    ObstacleMask cmask;
    cmask.nx = cnx;
    cmask.ny = cny;
    cmask.solid.assign(static_cast<std::size_t>(cnx) * cny, 0);
    int solid_count = 0;
    for (int j = 0; j < cny; ++j) {
        for (int i = 0; i < cnx; ++i) {
            const int fi = std::min(
                static_cast<int>(coarse.x_center(i) / grid.dx), nx - 1);
            const int fj = std::min(
                static_cast<int>(coarse.y_center(j) / grid.dy), ny - 1);
            if (mask.is_solid(fi, fj)) {
                cmask.solid[static_cast<std::size_t>(j) * cnx + i] = 1;
                ++solid_count;
            }
        }
    }
    if (solid_count == 0) {
        throw InvalidArgument(
            "build_proxy_surrogate: obstacle not resolved on the coarse grid");
    }
    for (int j = 0; j < cny; ++j) {
        for (int i = 0; i < cnx; ++i) {
            if (cmask.is_solid(i, j)) continue;
            if (cmask.is_solid(i - 1, j) || cmask.is_solid(i + 1, j) ||
                cmask.is_solid(i, j - 1) || cmask.is_solid(i, j + 1)) {
                cmask.boundary_cells.emplace_back(i, j);
            }
        }
    }

    SolverConfig cfg;
    cfg.dt = 0.15 * coarse.dx / fs.u_inf;
    // Several flow-through times: long enough for the coarse wake to settle
    // into its developed (possibly oscillating) state.  The instantaneous end
    // state is handed over rather than a time average because the average
    // cancels the wake's asymmetry, which is exactly the content a restarted
    // fine run can exploit.
    cfg.t_end = 4.0 * grid.spec.lx / fs.u_inf;
    cfg.sample_every = 64;
    TransientSolver solver(coarse, cmask, fs, cfg);

    RunResult rr = solver.run(init_potential(coarse, cmask, fs));
    const FlowState& handoff = rr.final_state;

    // Near-field box around the obstacle's physical footprint.
    int i0 = nx, i1 = -1, j0 = ny, j1 = -1;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (!mask.is_solid(i, j)) continue;
            i0 = std::min(i0, i);
            i1 = std::max(i1, i);
            j0 = std::min(j0, j);
            j1 = std::max(j1, j);
        }
    }
    const double ox0 = i0 * grid.dx;
    const double ox1 = (i1 + 1) * grid.dx;
    const double oy0 = j0 * grid.dy;
    const double oy1 = (j1 + 1) * grid.dy;
    const double length = std::max(ox1 - ox0, oy1 - oy0);

    SurrogateData out;
    out.xmin = std::max(0.0, ox0 - 1.5 * length);
    out.xmax = std::min(grid.spec.lx, ox1 + 4.0 * length);
    out.ymin = std::max(0.0, oy0 - 1.5 * length);
    out.ymax = std::min(grid.spec.ly, oy1 + 1.5 * length);

    const Field2D omega = center_vorticity(coarse, handoff.u, handoff.v);
    const double delta = std::max(coarse.dx, coarse.dy);
    for (int j = 0; j < cny; ++j) {
        for (int i = 0; i < cnx; ++i) {
            if (cmask.is_solid(i, j)) continue;
            const double x = coarse.x_center(i);
            const double y = coarse.y_center(j);
            if (x < out.xmin || x > out.xmax || y < out.ymin || y > out.ymax) {
                continue;
            }
            SurrogatePoint pt;
            pt.x = x;
            pt.y = y;
            pt.u = u_at_center(handoff.u, i, j);
            pt.v = v_at_center(handoff.v, i, j);
            pt.p = handoff.p(i, j);
            pt.k = k_from_vorticity(omega(i, j), delta, fs.k_inf);
            out.points.push_back(pt);
        }
    }
    validate_surrogate(out);
    return out;
}

// ---- initialization strategies ----------------------------------------------

FlowState init_uniform(const Grid& grid, const ObstacleMask& mask,
                       const FreestreamConditions& fs) {
    validate_freestream(fs);
    FlowState state = FlowState::zeros(grid);
    state.u.fill(fs.u_inf);
    state.k.fill(fs.k_inf);
    apply_boundary_conditions(grid, mask, fs, state);
    return state;
}

FlowState init_potential(const Grid& grid, const ObstacleMask& mask,
                         const FreestreamConditions& fs) {
    PotentialSolution sol = solve_potential(grid, mask, fs);
    clamp_potential_speed(sol, grid, mask, fs);
    FlowState state = FlowState::zeros(grid);
    state.u = std::move(sol.u);
    state.v = std::move(sol.v);
    state.p = std::move(sol.p);
    state.k.fill(fs.k_inf);
    apply_boundary_conditions(grid, mask, fs, state);
    return state;
}

FlowState init_prior_solution(const Grid& grid, const ObstacleMask& mask,
                              const FreestreamConditions& fs,
                              const std::string& path, bool drop_k) {
    validate_freestream(fs);
    const Snapshot snap = read_snapshot(path);
    FlowState state = snapshot_to_state(snap, grid, fs.k_inf);
    if (drop_k) {
        state.k.fill(fs.k_inf);
    } else {
        for (double& v : state.k.raw()) v = std::max(v, 0.0);
    }
    state.t = 0.0;
    apply_boundary_conditions(grid, mask, fs, state);
    validate_state(grid, state);
    return state;
}

FlowState extend_surrogate_uniform(const SurrogateData& s, const Grid& grid,
                                   const ObstacleMask& mask,
                                   const FreestreamConditions& fs,
                                   const IdwParams& params) {
    validate_freestream(fs);
    validate_surrogate(s);
    IdwParams idw = params;
    if (idw.eps == 0.0) idw.eps = domain_eps(grid.spec);

    const Cloud cloud = cloud_from_surrogate(s);
    const IdwInterpolator interp(cloud.xs, cloud.ys, idw);
    const auto inside = [&](double x, double y) {
        return x >= s.xmin && x <= s.xmax && y >= s.ymin && y <= s.ymax;
    };

    const int nx = grid.spec.nx;
    const int ny = grid.spec.ny;
    FlowState state = FlowState::zeros(grid);
    std::vector<int> idx;
    std::vector<double> w;

    for (int j = 0; j < ny; ++j) {
        const double y = grid.y_center(j);
        for (int i = 0; i <= nx; ++i) {
            const double x = grid.x_face(i);
            if (inside(x, y)) {
                interp.query(x, y, idx, w);
                state.u(i, j) = dot_channel(idx, w, cloud.u);
            } else {
                state.u(i, j) = fs.u_inf;
            }
        }
    }
    for (int j = 0; j <= ny; ++j) {
        const double y = grid.y_face(j);
        for (int i = 0; i < nx; ++i) {
            const double x = grid.x_center(i);
            if (inside(x, y)) {
                interp.query(x, y, idx, w);
                state.v(i, j) = dot_channel(idx, w, cloud.v);
            }
        }
    }
    for (int j = 0; j < ny; ++j) {
        const double y = grid.y_center(j);
        for (int i = 0; i < nx; ++i) {
            const double x = grid.x_center(i);
            if (inside(x, y)) {
                interp.query(x, y, idx, w);
                state.p(i, j) = dot_channel(idx, w, cloud.p);
                state.k(i, j) = dot_channel(idx, w, cloud.k);
            } else {
                state.k(i, j) = fs.k_inf;
            }
        }
    }
    apply_boundary_conditions(grid, mask, fs, state);
    return state;
}

FlowState extend_surrogate_idw(const SurrogateData& s, const Grid& grid,
                               const ObstacleMask& mask,
                               const FreestreamConditions& fs,
                               const IdwParams& params, int seed_stride) {
    validate_freestream(fs);
    validate_surrogate(s);
    if (seed_stride < 1) {
        throw InvalidArgument("extend_surrogate_idw: seed_stride must be >= 1");
    }
    IdwParams idw = params;
    if (idw.eps == 0.0) idw.eps = domain_eps(grid.spec);

    Cloud cloud = cloud_from_surrogate(s);
    add_boundary_seeds(cloud, grid, fs, seed_stride);
    const IdwInterpolator interp(cloud.xs, cloud.ys, idw);

    const int nx = grid.spec.nx;
    const int ny = grid.spec.ny;
    FlowState state = FlowState::zeros(grid);
    std::vector<int> idx;
    std::vector<double> w;

    for (int j = 0; j < ny; ++j) {
        const double y = grid.y_center(j);
        for (int i = 0; i <= nx; ++i) {
            interp.query(grid.x_face(i), y, idx, w);
            state.u(i, j) = dot_channel(idx, w, cloud.u);
        }
    }
    for (int j = 0; j <= ny; ++j) {
        const double y = grid.y_face(j);
        for (int i = 0; i < nx; ++i) {
            interp.query(grid.x_center(i), y, idx, w);
            state.v(i, j) = dot_channel(idx, w, cloud.v);
        }
    }
    for (int j = 0; j < ny; ++j) {
        const double y = grid.y_center(j);
        for (int i = 0; i < nx; ++i) {
            interp.query(grid.x_center(i), y, idx, w);
            state.p(i, j) = dot_channel(idx, w, cloud.p);
            state.k(i, j) = dot_channel(idx, w, cloud.k);
        }
    }
    apply_boundary_conditions(grid, mask, fs, state);
    return state;
}

FlowState init_surrogate_hybrid(const SurrogateData& s, const Grid& grid,
                                const ObstacleMask& mask,
                                const FreestreamConditions& fs,
                                const BlendParams& bp, const IdwParams& params,
                                int seed_stride) {
    validate_freestream(fs);
    validate_surrogate(s);
    validate_blend(bp);
    if (seed_stride < 1) {
        throw InvalidArgument(
            "init_surrogate_hybrid: seed_stride must be >= 1");
    }
    IdwParams idw = params;
    if (idw.eps == 0.0) idw.eps = domain_eps(grid.spec);

    Cloud cloud = cloud_from_surrogate(s);
    add_boundary_seeds(cloud, grid, fs, seed_stride);
    const IdwInterpolator interp(cloud.xs, cloud.ys, idw);

    PotentialSolution pot = solve_potential(grid, mask, fs);
    clamp_potential_speed(pot, grid, mask, fs);

    const int nx = grid.spec.nx;
    const int ny = grid.spec.ny;
    FlowState state = FlowState::zeros(grid);
    std::vector<int> idx;
    std::vector<double> w;

    for (int j = 0; j < ny; ++j) {
        const double y = grid.y_center(j);
        for (int i = 0; i <= nx; ++i) {
            interp.query(grid.x_face(i), y, idx, w);
            const double a = blend_alpha(dot_channel(idx, w, cloud.k), bp);
            state.u(i, j) = a * dot_channel(idx, w, cloud.u) +
                            (1.0 - a) * pot.u(i, j);
        }
    }
    for (int j = 0; j <= ny; ++j) {
        const double y = grid.y_face(j);
        for (int i = 0; i < nx; ++i) {
            interp.query(grid.x_center(i), y, idx, w);
            const double a = blend_alpha(dot_channel(idx, w, cloud.k), bp);
            state.v(i, j) = a * dot_channel(idx, w, cloud.v) +
                            (1.0 - a) * pot.v(i, j);
        }
    }
    for (int j = 0; j < ny; ++j) {
        const double y = grid.y_center(j);
        for (int i = 0; i < nx; ++i) {
            interp.query(grid.x_center(i), y, idx, w);
            const double kx = dot_channel(idx, w, cloud.k);
            const double a = blend_alpha(kx, bp);
            state.p(i, j) = a * dot_channel(idx, w, cloud.p) +
                            (1.0 - a) * pot.p(i, j);
            state.k(i, j) = a * kx + (1.0 - a) * fs.k_inf;
        }
    }
    apply_boundary_conditions(grid, mask, fs, state);
    return state;
}

// ---- strategy descriptor ----------------------------------------------------

bool strategy_needs_surrogate(StrategyKind kind) {
    return kind == StrategyKind::kSurrogateUniform ||
           kind == StrategyKind::kSurrogateIdw ||
           kind == StrategyKind::kSurrogateHybrid;
}

std::string strategy_name(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::kUniform: return "uniform";
        case StrategyKind::kPotential: return "potential";
        case StrategyKind::kPrior: return "prior";
        case StrategyKind::kSurrogateUniform: return "surrogate_uniform";
        case StrategyKind::kSurrogateIdw: return "surrogate_idw";
        case StrategyKind::kSurrogateHybrid: return "surrogate_hybrid";
    }
    return "unknown";
}

FlowState make_initial_state(const InitStrategy& strategy, const Grid& grid,
                             const ObstacleMask& mask,
                             const FreestreamConditions& fs,
                             const SurrogateData* surrogate) {
    if (strategy_needs_surrogate(strategy.kind) && surrogate == nullptr) {
        throw InvalidArgument("make_initial_state: strategy '" +
                              strategy_name(strategy.kind) +
                              "' needs a surrogate field");
    }
    switch (strategy.kind) {
        case StrategyKind::kUniform:
            return init_uniform(grid, mask, fs);
        case StrategyKind::kPotential:
            return init_potential(grid, mask, fs);
        case StrategyKind::kPrior:
            return init_prior_solution(grid, mask, fs, strategy.prior_path,
                                       strategy.prior_drop_k);
        case StrategyKind::kSurrogateUniform:
            return extend_surrogate_uniform(*surrogate, grid, mask, fs);
        case StrategyKind::kSurrogateIdw:
            return extend_surrogate_idw(*surrogate, grid, mask, fs, {},
                                        strategy.seed_stride);
        case StrategyKind::kSurrogateHybrid: {
            const BlendParams bp = strategy.blend.has_value()
                                       ? *strategy.blend
                                       : BlendParams::defaults(fs.k_inf);
            return init_surrogate_hybrid(*surrogate, grid, mask, fs, bp, {},
                                         strategy.seed_stride);
        }
    }
    throw InvalidArgument("make_initial_state: unknown strategy");
}

}  // namespace initlab
