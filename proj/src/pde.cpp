#include "pcx/pde.hpp"

#include <algorithm>
#include <cmath>

namespace pcx {

void StretchedAxis::validate() const {
    if (!(b > 0.0)) throw validation_error("axis: b must be > 0");
    if (j_points <= 0 || j_points % 2 != 0)
        throw validation_error("axis: j_points must be a positive even number");
    if (std::abs(c + b * anchor_z) > 1e-12 * std::max(1.0, std::abs(c)))
        throw validation_error("axis: c must equal -b * anchor_z");
}

double StretchedAxis::y_of_z(double z) const {
    return std::atan(b * z + c) / M_PI + 0.5;
}

double StretchedAxis::z_of_y(double y) const {
    return (std::tan(M_PI * (y - 0.5)) - c) / b;
}

std::pair<double, double> stretched_coefficients(const StretchedAxis& axis, double y) {
    if (!(y > 0.0 && y < 1.0))
        throw validation_error("stretched_coefficients: y must lie in (0,1)");
    const double th = M_PI * (y - 0.5);
    const double co = std::cos(th);
    const double si = std::sin(th);
    const double dydz = axis.b / M_PI * co * co;
    const double d2ydz2 = -2.0 * axis.b * axis.b / M_PI * si * co * co * co;
    return {dydz * dydz, d2ydz2};
}

StretchedAxis choose_axis(double lambda_k, double horizon, double anchor, int j_points,
                          double kappa) {
    if (!(lambda_k > 0.0)) throw validation_error("choose_axis: lambda must be > 0");
    if (!(horizon > 0.0)) throw validation_error("choose_axis: horizon must be > 0");
    if (!(kappa > 0.0)) throw validation_error("choose_axis: kappa must be > 0");
    StretchedAxis ax;
    ax.b = 1.0 / (kappa * std::sqrt(2.0 * lambda_k * horizon));
    ax.anchor_z = anchor;
    ax.c = -ax.b * anchor;
    ax.j_points = j_points;
    ax.validate();
    return ax;
}

TridiagonalFactor::TridiagonalFactor(std::span<const double> lower,
                                     std::span<const double> diag,
                                     std::span<const double> upper)
    : elim_(diag.size(), 0.0), diag_(diag.begin(), diag.end()),
      upper_(upper.begin(), upper.end()) {
    const size_t n = diag_.size();
    if (lower.size() != n || upper.size() != n)
        throw validation_error("tridiagonal: band lengths must match");
    if (n == 0) throw validation_error("tridiagonal: empty system");
    if (diag_[0] == 0.0) throw numerical_error("tridiagonal: zero pivot at row 0");
    for (size_t i = 1; i < n; ++i) {
        elim_[i] = lower[i] / diag_[i - 1];
        diag_[i] = diag[i] - elim_[i] * upper_[i - 1];
        if (diag_[i] == 0.0)
            throw numerical_error("tridiagonal: zero pivot at row " + std::to_string(i));
    }
}

void TridiagonalFactor::solve_in_place(std::span<double> rhs) const {
    const size_t n = diag_.size();
    for (size_t i = 1; i < n; ++i) rhs[i] -= elim_[i] * rhs[i - 1];
    rhs[n - 1] /= diag_[n - 1];
    for (size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper_[i] * rhs[i + 1]) / diag_[i];
}

std::vector<double> thomas_solve(std::span<const double> lower, std::span<const double> diag,
                                 std::span<const double> upper, std::span<const double> rhs) {
    if (rhs.size() != diag.size()) throw validation_error("thomas_solve: rhs length mismatch");
    TridiagonalFactor f(lower, diag, upper);
    std::vector<double> x(rhs.begin(), rhs.end());
    f.solve_in_place(x);
    return x;
}

void SubProblem::validate() const {
    const int d = subset.size();
    if (d < 1 || d > 3)
        throw validation_error("sub-problem: unsupported dimension " + std::to_string(d) +
                               " (only 1, 2, 3)");
    if (static_cast<int>(lambdas.size()) != d || static_cast<int>(axes.size()) != d)
        throw validation_error("sub-problem: lambdas/axes must match subset size");
    for (double l : lambdas)
        if (!(l > 0.0)) throw validation_error("sub-problem: diffusion coefficients must be > 0");
    if (!(horizon > 0.0)) throw validation_error("sub-problem: horizon must be > 0");
    if (m_steps < 1) throw validation_error("sub-problem: m_steps must be >= 1");
    if (!initial) throw validation_error("sub-problem: missing initial condition");
    for (const auto& ax : axes) ax.validate();
}

namespace {

// Per-axis discretization: node pre-images and the operator bands of
// lambda d2/dz2 on the uniform y grid. Boundary rows are identically zero;
// the diagonal is the exact negative of lower+upper so constants are in the
// operator's kernel to the last bit.
struct AxisGrid {
    std::vector<double> z;      // node pre-images (boundary nodes half-cell shifted)
    std::vector<double> lower, diag, upper;
};

AxisGrid discretize_axis(const StretchedAxis& ax, double lambda) {
    const int J = ax.j_points;
    const double h = 1.0 / J;
    AxisGrid g;
    g.z.resize(J + 1);
    g.lower.assign(J + 1, 0.0);
    g.diag.assign(J + 1, 0.0);
    g.upper.assign(J + 1, 0.0);
    for (int j = 0; j <= J; ++j) {
        const double y = std::clamp(j * h, h / 2.0, 1.0 - h / 2.0);
        g.z[j] = ax.z_of_y(y);
    }
    g.z[J / 2] = ax.anchor_z;  // exact by construction of c; avoid tan/atan round-trip
    for (int j = 1; j < J; ++j) {
        auto [ayy, ay] = stretched_coefficients(ax, j * h);
        g.lower[j] = lambda * (ayy / (h * h) - ay / (2.0 * h));
        g.upper[j] = lambda * (ayy / (h * h) + ay / (2.0 * h));
        g.diag[j] = -(g.lower[j] + g.upper[j]);
    }
    return g;
}

// Dense tensor grid with line-wise tridiagonal operations. Axis d is viewed
// as (outer, axis, inner) blocks so inner loops stay contiguous.
struct TensorGrid {
    std::vector<AxisGrid> axes;
    std::vector<int> sizes;  // nodes per axis

    size_t total() const {
        size_t t = 1;
        for (int s : sizes) t *= static_cast<size_t>(s);
        return t;
    }

    // out += scale * (T_d in)
    void apply_axis(int d, double scale, const std::vector<double>& in,
                    std::vector<double>& out) const {
        const auto& ax = axes[d];
        const int S = sizes[d];
        size_t inner = 1, outer = 1;
        for (int k = d + 1; k < static_cast<int>(sizes.size()); ++k) inner *= sizes[k];
        for (int k = 0; k < d; ++k) outer *= sizes[k];
        for (size_t o = 0; o < outer; ++o) {
            const size_t base = o * S * inner;
            for (int s = 0; s < S; ++s) {
                const double lo = scale * ax.lower[s];
                const double di = scale * ax.diag[s];
                const double up = scale * ax.upper[s];
                const size_t row = base + s * inner;
                const double* mid = in.data() + row;
                double* dst = out.data() + row;
                if (lo == 0.0 && up == 0.0 && di == 0.0) continue;
                const double* dn = (s > 0) ? in.data() + row - inner : nullptr;
                const double* upq = (s < S - 1) ? in.data() + row + inner : nullptr;
                for (size_t i = 0; i < inner; ++i) {
                    double v = di * mid[i];
                    if (dn) v += lo * dn[i];
                    if (upq) v += up * upq[i];
                    dst[i] += v;
                }
            }
        }
    }

    // Solve (I - c T_d) x = rhs in place along every line of axis d.
    void solve_axis(int d, const TridiagonalFactor& f, std::vector<double>& u) const {
        const int S = sizes[d];
        size_t inner = 1, outer = 1;
        for (int k = d + 1; k < static_cast<int>(sizes.size()); ++k) inner *= sizes[k];
        for (int k = 0; k < d; ++k) outer *= sizes[k];
        const auto elim = f.elim();
        const auto diag = f.diag();
        const auto upper = f.upper();
        for (size_t o = 0; o < outer; ++o) {
            double* base = u.data() + o * S * inner;
            for (int s = 1; s < S; ++s) {
                const double l = elim[s];
                double* row = base + s * inner;
                const double* prev = row - inner;
                if (l != 0.0)
                    for (size_t i = 0; i < inner; ++i) row[i] -= l * prev[i];
            }
            {
                double* row = base + (S - 1) * inner;
                const double dinv = 1.0 / diag[S - 1];
                for (size_t i = 0; i < inner; ++i) row[i] *= dinv;
            }
            for (int s = S - 2; s >= 0; --s) {
                double* row = base + s * inner;
                const double* next = row + inner;
                const double up = upper[s];
                const double dinv = 1.0 / diag[s];
                for (size_t i = 0; i < inner; ++i) row[i] = (row[i] - up * next[i]) * dinv;
            }
        }
    }
};

TridiagonalFactor implicit_factor(const AxisGrid& g, double c) {
    const size_t n = g.diag.size();
    std::vector<double> lo(n), di(n), up(n);
    for (size_t i = 0; i < n; ++i) {
        lo[i] = -c * g.lower[i];
        di[i] = 1.0 - c * g.diag[i];
        up[i] = -c * g.upper[i];
    }
    return TridiagonalFactor(lo, di, up);
}

std::vector<double> initial_values(const TensorGrid& grid, const SubProblem& p) {
    const int d = static_cast<int>(grid.sizes.size());
    std::vector<double> u(grid.total());
    std::vector<double> zpt(d);
    std::vector<int> idx(d, 0);
    for (size_t flat = 0; flat < u.size(); ++flat) {
        size_t rem = flat;
        for (int k = d - 1; k >= 0; --k) {
            idx[k] = static_cast<int>(rem % grid.sizes[k]);
            rem /= grid.sizes[k];
        }
        for (int k = 0; k < d; ++k) zpt[k] = grid.axes[k].z[idx[k]];
        // The cutoff only bites far outside the resolved core; without it the
        // far-field nodes of growing payoffs reach ~1e300 and leak into the
        // anchor through the implicit solves.
        u[flat] = std::clamp(p.initial(zpt), -p.cutoff, p.cutoff);
    }
    return u;
}

}  // namespace

SubProblemField solve_subproblem_field(const SubProblem& p) {
    p.validate();
    const int d = p.subset.size();

    TensorGrid grid;
    for (int k = 0; k < d; ++k) {
        grid.axes.push_back(discretize_axis(p.axes[k], p.lambdas[k]));
        grid.sizes.push_back(p.axes[k].j_points + 1);
    }

    const double dt = p.horizon / p.m_steps;
    const double h = dt / 2.0;
    std::vector<double> u = initial_values(grid, p);

    if (d == 1) {
        TridiagonalFactor f = implicit_factor(grid.axes[0], h);
        std::vector<double> rhs(u.size());
        for (int step = 0; step < p.m_steps; ++step) {
            rhs = u;
            grid.apply_axis(0, h, u, rhs);
            grid.solve_axis(0, f, rhs);
            u.swap(rhs);
        }
    } else if (d == 2) {
        TridiagonalFactor f0 = implicit_factor(grid.axes[0], h);
        TridiagonalFactor f1 = implicit_factor(grid.axes[1], h);
        std::vector<double> work(u.size());
        for (int step = 0; step < p.m_steps; ++step) {
            work = u;
            grid.apply_axis(1, h, u, work);      // (I + h A1) u
            grid.solve_axis(0, f0, work);        // u* from (I - h A0) u* = ...
            std::vector<double>& ustar = work;
            std::vector<double>& next = u;
            next = ustar;
            grid.apply_axis(0, h, ustar, next);  // (I + h A0) u*
            grid.solve_axis(1, f1, next);        // (I - h A1) u^{n+1} = ...
        }
    } else {
        TridiagonalFactor f0 = implicit_factor(grid.axes[0], h);
        TridiagonalFactor f1 = implicit_factor(grid.axes[1], h);
        TridiagonalFactor f2 = implicit_factor(grid.axes[2], h);
        std::vector<double> ustar(u.size()), ustar2(u.size()), rhs(u.size());
        for (int step = 0; step < p.m_steps; ++step) {
            // (I - h A0) u* = u + h (A1 + A2) u
            ustar = u;
            grid.apply_axis(1, h, u, ustar);
            grid.apply_axis(2, h, u, ustar);
            grid.solve_axis(0, f0, ustar);
            // (I - h A1) u** = u + h A0 u* + h A2 u
            ustar2 = u;
            grid.apply_axis(0, h, ustar, ustar2);
            grid.apply_axis(2, h, u, ustar2);
            grid.solve_axis(1, f1, ustar2);
            // (I - h A2) u^{n+1} = u + dt A0 u* + dt A1 u** + h A2 u
            rhs = u;
            grid.apply_axis(0, dt, ustar, rhs);
            grid.apply_axis(1, dt, ustar2, rhs);
            grid.apply_axis(2, h, u, rhs);
            grid.solve_axis(2, f2, rhs);
            u.swap(rhs);
        }
    }

    SubProblemField out;
    out.sizes = grid.sizes;
    size_t anchor_flat = 0;
    for (int k = 0; k < d; ++k)
        anchor_flat = anchor_flat * grid.sizes[k] + grid.sizes[k] / 2;
    out.anchor_index = anchor_flat;
    out.field = std::move(u);
    if (!std::isfinite(out.field[anchor_flat]))
        throw numerical_error("sub-problem " + p.subset.to_string() + ": non-finite result");
    return out;
}

double solve_subproblem(const SubProblem& p) {
    const SubProblemField f = solve_subproblem_field(p);
    return f.field[f.anchor_index];
}

}  // namespace pcx
