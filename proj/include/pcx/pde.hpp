#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "pcx/errors.hpp"
#include "pcx/expansion.hpp"

namespace pcx {

/// One spatial axis of a sub-problem grid. The real line is mapped to (0,1) by
/// y = arctan(b z + c)/pi + 1/2 and discretized with J equal intervals in y.
/// c = -b * anchor_z places the evaluation point exactly on the mid node
/// (J must be even), so the reported value needs no interpolation.
struct StretchedAxis {
    double b = 1.0;
    double c = 0.0;
    int j_points = 0;  // interval count J, even
    double anchor_z = 0.0;

    void validate() const;
    double y_of_z(double z) const;
    double z_of_y(double y) const;
};

/// Factors of the transformed one-dimensional operator:
/// lambda d2/dz2 = lambda [a_yy d2/dy2 + a_y d/dy] with
/// a_yy = (dy/dz)^2, a_y = d2y/dz2. Both vanish as y -> 0, 1, which is what
/// makes the boundary rows degenerate (no boundary condition needed).
/// y must lie strictly inside (0,1).
std::pair<double, double> stretched_coefficients(const StretchedAxis& axis, double y);

/// b = 1 / (kappa sqrt(2 lambda T)), c = -b * anchor: the middle half of the
/// grid covers +-kappa standard deviations of the heat kernel around the anchor.
StretchedAxis choose_axis(double lambda_k, double horizon, double anchor, int j_points,
                          double kappa = 5.0);

/// Cached LU factorization of a tridiagonal system, reusable across solves.
class TridiagonalFactor {
public:
    /// Factors the matrix with the given bands; throws numerical_error on a
    /// zero pivot. lower[0] and upper[n-1] are ignored.
    TridiagonalFactor(std::span<const double> lower, std::span<const double> diag,
                      std::span<const double> upper);

    void solve_in_place(std::span<double> rhs) const;
    int size() const { return static_cast<int>(diag_.size()); }

    std::span<const double> elim() const { return elim_; }
    std::span<const double> diag() const { return diag_; }
    std::span<const double> upper() const { return upper_; }

private:
    std::vector<double> elim_;   // multipliers l_i
    std::vector<double> diag_;   // pivots d_i
    std::vector<double> upper_;
};

/// Solves one tridiagonal system (Thomas algorithm).
std::vector<double> thomas_solve(std::span<const double> lower, std::span<const double> diag,
                                 std::span<const double> upper, std::span<const double> rhs);

/// One low-dimensional heat sub-problem: du/dt = sum_k lambda_k d2u/dz_k^2 on
/// the plane spanned by the subset's coordinates through the anchor, with the
/// remaining coordinates frozen. `initial` receives the plane coordinates in
/// subset order. Dimensions 1-3 are supported.
struct SubProblem {
    IndexSet subset;               // reporting/bookkeeping only
    std::vector<double> lambdas;   // heat diffusion coefficients, > 0, one per axis
    std::vector<StretchedAxis> axes;
    double horizon = 1.0;
    int m_steps = 0;
    std::function<double(std::span<const double>)> initial;
    // Cutoff for unbounded payoffs: initial data is clamped to [-cutoff, cutoff].
    // Sized so it only bites far outside the resolved core; +inf disables it.
    double cutoff = std::numeric_limits<double>::infinity();

    void validate() const;
};

/// Value of u^nu at the anchor point and time `horizon`.
/// 1D: Crank-Nicolson; 2D: Peaceman-Rachford ADI; 3D: Brian ADI.
/// The reported value is the anchor grid node, read off directly.
double solve_subproblem(const SubProblem& p);

/// Final time slice on the full tensor grid (row-major over the axes) plus
/// the flat index of the anchor node. solve_subproblem returns exactly
/// field[anchor_index].
struct SubProblemField {
    std::vector<double> field;
    std::vector<int> sizes;  // nodes per axis
    size_t anchor_index = 0;
};
SubProblemField solve_subproblem_field(const SubProblem& p);

}  // namespace pcx
