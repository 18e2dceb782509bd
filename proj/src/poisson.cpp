#include "initlab/poisson.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>

namespace initlab {

namespace {

// Neighbor order: west, east, south, north.
constexpr int kWest = 0;
constexpr int kEast = 1;
constexpr int kSouth = 2;
constexpr int kNorth = 3;

}  // namespace

void StencilOperator::apply(const std::vector<double>& x,
                            std::vector<double>& ax) const {
    const std::size_t n = size();
    ax.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t base = 4 * c;
        double acc = diag[c] * x[c];
        acc -= coef[base + 0] * x[nbr[base + 0]];
        acc -= coef[base + 1] * x[nbr[base + 1]];
        acc -= coef[base + 2] * x[nbr[base + 2]];
        acc -= coef[base + 3] * x[nbr[base + 3]];
        ax[c] = acc;
    }
}

double StencilOperator::residual(const std::vector<double>& b,
                                 const std::vector<double>& x,
                                 std::vector<double>& r) const {
    const std::size_t n = size();
    r.resize(n);
    double rmax = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t base = 4 * c;
        double acc = b[c] - diag[c] * x[c];
        acc += coef[base + 0] * x[nbr[base + 0]];
        acc += coef[base + 1] * x[nbr[base + 1]];
        acc += coef[base + 2] * x[nbr[base + 2]];
        acc += coef[base + 3] * x[nbr[base + 3]];
        r[c] = acc;
        if (fluid[c]) {
            const double a = std::abs(acc);
            if (a > rmax) rmax = a;
        }
    }
    return rmax;
}

double StencilOperator::mean_over_fluid(const std::vector<double>& x) const {
    if (fluid_count == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t c = 0; c < size(); ++c) {
        if (fluid[c]) sum += x[c];
    }
    return sum / static_cast<double>(fluid_count);
}

void StencilOperator::subtract_mean(std::vector<double>& x) const {
    const double m = mean_over_fluid(x);
    for (std::size_t c = 0; c < size(); ++c) {
        if (fluid[c]) x[c] -= m;
    }
}

StencilOperator build_stencil(const PoissonProblem& pb) {
    StencilOperator op;
    op.nx = pb.nx;
    op.ny = pb.ny;
    op.dx = pb.dx;
    op.dy = pb.dy;
    const int nx = pb.nx;
    const int ny = pb.ny;
    const std::size_t n = op.size();
    op.nbr.assign(4 * n, 0);
    op.coef.assign(4 * n, 0.0);
    op.diag.assign(n, 0.0);
    op.fluid.assign(n, 1);
    if (!pb.solid.empty()) {
        for (std::size_t c = 0; c < n; ++c) op.fluid[c] = pb.solid[c] ? 0 : 1;
    }
    for (std::size_t c = 0; c < n; ++c) {
        if (op.fluid[c]) ++op.fluid_count;
    }

    const double cx = 1.0 / (pb.dx * pb.dx);
    const double cy = 1.0 / (pb.dy * pb.dy);
    bool any_dirichlet = false;

    auto cell = [nx](int i, int j) {
        return static_cast<std::size_t>(j) * nx + i;
    };

    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const std::size_t c = cell(i, j);
            const std::size_t base = 4 * c;
            // Self-pointing neighbors with zero coefficient are harmless.
            op.nbr[base + kWest] = op.nbr[base + kEast] = static_cast<int>(c);
            op.nbr[base + kSouth] = op.nbr[base + kNorth] = static_cast<int>(c);
            if (!op.fluid[c]) {
                op.diag[c] = 1.0;  // identity row for solid cells
                continue;
            }
            double d = 0.0;
            auto connect = [&](int slot, int ni, int nj, double cc,
                               EdgeCondition edge, bool outside) {
                if (outside) {
                    switch (edge) {
                        case EdgeCondition::kNeumann:
                            return;  // dropped
                        case EdgeCondition::kDirichletFace:
                            d += 2.0 * cc;  // ghost value is -x(c)
                            any_dirichlet = true;
                            return;
                        case EdgeCondition::kPeriodic:
                            ni = (ni + nx) % nx;
                            nj = (nj + ny) % ny;
                            break;
                    }
                }
                const std::size_t nc = cell(ni, nj);
                if (!op.fluid[nc]) return;  // no-flux at solid faces
                op.nbr[base + slot] = static_cast<int>(nc);
                op.coef[base + slot] = cc;
                d += cc;
            };
            connect(kWest, i - 1, j, cx, pb.x_lo, i == 0);
            connect(kEast, i + 1, j, cx, pb.x_hi, i == nx - 1);
            connect(kSouth, i, j - 1, cy, pb.y_lo, j == 0);
            connect(kNorth, i, j + 1, cy, pb.y_hi, j == ny - 1);
            // Fully enclosed fluid cells cannot appear given the two-cell
            // obstacle clearance rule, but keep the row invertible anyway.
            op.diag[c] = (d > 0.0) ? d : 1.0;
        }
    }
    op.singular = !any_dirichlet;
    return op;
}

// ---------------------------------------------------------------------------
// Multigrid
// ---------------------------------------------------------------------------

MultigridPoisson::MultigridPoisson(const PoissonProblem& problem) {
    PoissonProblem pb = problem;
    while (true) {
        StencilOperator op = build_stencil(pb);
        levels_.push_back(Level{std::move(op), {}, {}, {}});
        if (pb.nx % 2 != 0 || pb.ny % 2 != 0 || pb.nx < 8 || pb.ny < 8) break;
        PoissonProblem coarse = pb;
        coarse.nx = pb.nx / 2;
        coarse.ny = pb.ny / 2;
        coarse.dx = pb.dx * 2.0;
        coarse.dy = pb.dy * 2.0;
        coarse.solid.clear();
        if (!pb.solid.empty()) {
            coarse.solid.assign(
                static_cast<std::size_t>(coarse.nx) * coarse.ny, 0);
            for (int j = 0; j < coarse.ny; ++j) {
                for (int i = 0; i < coarse.nx; ++i) {
                    int fluid_children = 0;
                    for (int dj = 0; dj < 2; ++dj) {
                        for (int di = 0; di < 2; ++di) {
                            const std::size_t fc =
                                static_cast<std::size_t>(2 * j + dj) * pb.nx +
                                (2 * i + di);
                            if (pb.solid[fc] == 0) ++fluid_children;
                        }
                    }
                    // Coarse cells stay fluid while any child is fluid, so
                    // narrow channels remain open on coarse levels.
                    if (fluid_children == 0) {
                        coarse.solid[static_cast<std::size_t>(j) * coarse.nx +
                                     i] = 1;
                    }
                }
            }
        }
        pb = std::move(coarse);
    }
    for (Level& lv : levels_) {
        lv.b.assign(lv.op.size(), 0.0);
        lv.x.assign(lv.op.size(), 0.0);
        lv.r.assign(lv.op.size(), 0.0);
    }
}

void MultigridPoisson::smooth(Level& lv, int sweeps) {
    const StencilOperator& op = lv.op;
    const int nx = op.nx;
    const int ny = op.ny;
    std::vector<double>& x = lv.x;
    const std::vector<double>& b = lv.b;
    for (int s = 0; s < sweeps; ++s) {
        for (int color = 0; color < 2; ++color) {
            for (int j = 0; j < ny; ++j) {
                const int i0 = (j + color) & 1;
                for (int i = i0; i < nx; i += 2) {
                    const std::size_t c = static_cast<std::size_t>(j) * nx + i;
                    const std::size_t base = 4 * c;
                    double acc = b[c];
                    acc += op.coef[base + 0] * x[op.nbr[base + 0]];
                    acc += op.coef[base + 1] * x[op.nbr[base + 1]];
                    acc += op.coef[base + 2] * x[op.nbr[base + 2]];
                    acc += op.coef[base + 3] * x[op.nbr[base + 3]];
                    x[c] = acc / op.diag[c];
                }
            }
        }
    }
}

void MultigridPoisson::cycle(std::size_t depth) {
    Level& lv = levels_[depth];
    if (depth + 1 == levels_.size()) {
        smooth(lv, 40);
        if (lv.op.singular) lv.op.subtract_mean(lv.x);
        return;
    }
    smooth(lv, 2);
    lv.op.residual(lv.b, lv.x, lv.r);

    Level& cl = levels_[depth + 1];
    const int cnx = cl.op.nx;
    const int cny = cl.op.ny;
    const int fnx = lv.op.nx;
    // Restriction: average the residual over fluid children.
    for (int j = 0; j < cny; ++j) {
        for (int i = 0; i < cnx; ++i) {
            const std::size_t cc = static_cast<std::size_t>(j) * cnx + i;
            double sum = 0.0;
            int count = 0;
            for (int dj = 0; dj < 2; ++dj) {
                for (int di = 0; di < 2; ++di) {
                    const std::size_t fc =
                        static_cast<std::size_t>(2 * j + dj) * fnx +
                        (2 * i + di);
                    if (lv.op.fluid[fc]) {
                        sum += lv.r[fc];
                        ++count;
                    }
                }
            }
            cl.b[cc] = (count > 0) ? sum / count : 0.0;
            cl.x[cc] = 0.0;
        }
    }
    cycle(depth + 1);

    // Prolongation: bilinear in the interior; collapses onto the available
    // fluid cell at edges and next to solid cells.
    const int cny_max = cny - 1;
    const int cnx_max = cnx - 1;
    for (int j = 0; j < lv.op.ny; ++j) {
        const int J = j >> 1;
        int J2 = (j & 1) ? J + 1 : J - 1;
        if (J2 < 0) J2 = 0;
        if (J2 > cny_max) J2 = cny_max;
        for (int i = 0; i < fnx; ++i) {
            const std::size_t fc = static_cast<std::size_t>(j) * fnx + i;
            if (!lv.op.fluid[fc]) continue;
            const int I = i >> 1;
            int I2 = (i & 1) ? I + 1 : I - 1;
            if (I2 < 0) I2 = 0;
            if (I2 > cnx_max) I2 = cnx_max;

            const std::size_t c00 = static_cast<std::size_t>(J) * cnx + I;
            std::size_t c10 = static_cast<std::size_t>(J) * cnx + I2;
            std::size_t c01 = static_cast<std::size_t>(J2) * cnx + I;
            std::size_t c11 = static_cast<std::size_t>(J2) * cnx + I2;
            if (!cl.op.fluid[c10]) c10 = c00;
            if (!cl.op.fluid[c01]) c01 = c00;
            if (!cl.op.fluid[c11]) c11 = c00;
            lv.x[fc] += 0.5625 * cl.x[c00] + 0.1875 * cl.x[c10] +
                        0.1875 * cl.x[c01] + 0.0625 * cl.x[c11];
        }
    }
    smooth(lv, 2);
}

int MultigridPoisson::solve(const std::vector<double>& b,
                            std::vector<double>& x, double tol_abs,
                            int max_cycles) {
    Level& top = levels_.front();
    top.b = b;
    top.x = x;
    if (top.op.singular) top.op.subtract_mean(top.b);

    std::vector<double> history;
    double rmax = top.op.residual(top.b, top.x, top.r);
    history.push_back(rmax);
    int cycles = 0;
    while (rmax > tol_abs && cycles < max_cycles) {
        cycle(0);
        if (top.op.singular) top.op.subtract_mean(top.x);
        rmax = top.op.residual(top.b, top.x, top.r);
        history.push_back(rmax);
        ++cycles;
    }
    last_residual_ = rmax;
    if (rmax > tol_abs) {
        std::ostringstream os;
        os << "MultigridPoisson: residual " << rmax << " above tolerance "
           << tol_abs << " after " << cycles << " V-cycles";
        throw PoissonError(os.str(), std::move(history));
    }
    x = top.x;
    return cycles;
}

// ---------------------------------------------------------------------------
// Conjugate gradients
// ---------------------------------------------------------------------------

int solve_cg(const StencilOperator& op, const std::vector<double>& b,
             std::vector<double>& x, double rel_tol, double abs_inf_tol,
             int max_iters, std::vector<double>* history) {
    const std::size_t n = op.size();
    std::vector<double> r(n, 0.0), z(n, 0.0), p(n, 0.0), ap(n, 0.0);
    std::vector<double> bb = b;
    x.resize(n, 0.0);
    if (op.singular) op.subtract_mean(bb);

    auto dot = [&op](const std::vector<double>& a, const std::vector<double>& c) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (op.fluid[i]) s += a[i] * c[i];
        }
        return s;
    };
    auto inf_norm = [&op](const std::vector<double>& a) {
        double m = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (op.fluid[i]) m = std::max(m, std::abs(a[i]));
        }
        return m;
    };

    const double bnorm = std::sqrt(dot(bb, bb));
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        if (history) history->push_back(0.0);
        return 0;
    }

    op.residual(bb, x, r);
    if (op.singular) op.subtract_mean(r);
    for (std::size_t i = 0; i < n; ++i) z[i] = op.fluid[i] ? r[i] / op.diag[i] : 0.0;
    if (op.singular) op.subtract_mean(z);
    p = z;
    double rz = dot(r, z);

    std::vector<double> hist;
    int it = 0;
    for (; it < max_iters; ++it) {
        const double rel = std::sqrt(dot(r, r)) / bnorm;
        hist.push_back(rel);
        if (rel <= rel_tol &&
            (abs_inf_tol <= 0.0 || inf_norm(r) <= abs_inf_tol)) {
            break;
        }
        op.apply(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) break;  // breakdown; reported below via tolerance
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            if (!op.fluid[i]) continue;
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if (op.singular) op.subtract_mean(r);
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = op.fluid[i] ? r[i] / op.diag[i] : 0.0;
        }
        if (op.singular) op.subtract_mean(z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) {
            if (op.fluid[i]) p[i] = z[i] + beta * p[i];
        }
    }

    const double rel = std::sqrt(dot(r, r)) / bnorm;
    if (history) *history = hist;
    if (rel > rel_tol ||
        (abs_inf_tol > 0.0 && inf_norm(r) > abs_inf_tol)) {
        std::ostringstream os;
        os << "solve_cg: relative residual " << rel << " above tolerance "
           << rel_tol << " after " << it << " iterations";
        throw PoissonError(os.str(), std::move(hist));
    }
    if (op.singular) op.subtract_mean(x);
    return it;
}

}  // namespace initlab
