#include <doctest.h>

#include <cmath>
#include <random>

#include "pcx/pde.hpp"

using namespace pcx;

namespace {

// Dense Gaussian elimination with partial pivoting, test-side reference.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return x;
}

SubProblem cosine_problem(std::vector<double> lambdas, double horizon, int j, int m) {
    SubProblem p;
    std::vector<int> subset;
    for (size_t k = 0; k < lambdas.size(); ++k) subset.push_back(static_cast<int>(k) + 1);
    p.subset = IndexSet(subset);
    p.lambdas = lambdas;
    for (double lam : lambdas) p.axes.push_back(choose_axis(lam, horizon, 0.0, j));
    p.horizon = horizon;
    p.m_steps = m;
    p.initial = [](std::span<const double> z) {
        double prod = 1.0;
        for (double zk : z) prod *= std::cos(zk);
        return prod;
    };
    return p;
}

double fitted_order(const std::vector<double>& errs) {
    // errors at successive (J, M) doublings; least-squares slope vs log(1/2^i)
    const int n = static_cast<int>(errs.size());
    double xm = 0, ym = 0;
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
        x[i] = -i * std::log(2.0);
        y[i] = std::log(errs[i]);
        xm += x[i];
        ym += y[i];
    }
    xm /= n;
    ym /= n;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sxx += (x[i] - xm) * (x[i] - xm);
        sxy += (x[i] - xm) * (y[i] - ym);
    }
    return sxy / sxx;
}

}  // namespace

TEST_CASE("stretched coefficients") {
    StretchedAxis ax;
    ax.b = 1.0;
    ax.c = 0.0;
    ax.j_points = 4;
    ax.anchor_z = 0.0;

    auto [ayy, ay] = stretched_coefficients(ax, 0.5);
    CHECK(ayy == doctest::Approx(1.0 / (M_PI * M_PI)).epsilon(1e-14));
    CHECK(ay == doctest::Approx(0.0));

    auto [ayy0, ay0] = stretched_coefficients(ax, 1e-7);
    CHECK(std::abs(ayy0) < 1e-20);
    CHECK(std::abs(ay0) < 1e-13);

    CHECK_THROWS_AS(stretched_coefficients(ax, 0.0), validation_error);
    CHECK_THROWS_AS(stretched_coefficients(ax, 1.0), validation_error);

    // dy/dz against a central difference of the forward map
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ud(0.05, 0.95);
    StretchedAxis ax2 = choose_axis(0.02, 1.0, 0.7, 8);
    for (int rep = 0; rep < 20; ++rep) {
        const double y = ud(rng);
        const double z = ax2.z_of_y(y);
        const double h = 1e-6;
        const double dydz_fd = (ax2.y_of_z(z + h) - ax2.y_of_z(z - h)) / (2 * h);
        auto [ayy2, ay2] = stretched_coefficients(ax2, y);
        CHECK(std::abs(std::sqrt(ayy2) - std::abs(dydz_fd)) < 1e-6 * std::abs(dydz_fd));
        (void)ay2;
    }
}

TEST_CASE("axis choice") {
    const StretchedAxis ax = choose_axis(0.02, 1.0, 0.0, 100);
    CHECK(ax.b == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ax.c == doctest::Approx(0.0));
    const StretchedAxis ax2 = choose_axis(0.02, 1.0, 1.7, 100);
    CHECK(ax2.c == doctest::Approx(-1.7 * ax2.b).epsilon(1e-14));
    // anchor maps to the exact mid point
    CHECK(ax2.y_of_z(1.7) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("tridiagonal solver") {
    {
        const std::vector<double> lower = {0, 1, 1}, diag = {2, 2, 2}, upper = {1, 1, 0};
        const auto x = thomas_solve(lower, diag, upper, std::vector<double>{3, 4, 3});
        for (double xi : x) CHECK(xi == doctest::Approx(1.0).epsilon(1e-14));
    }
    {
        const std::vector<double> z = {0, 0, 0, 0}, one = {1, 1, 1, 1};
        const std::vector<double> rhs = {4.0, -1.0, 0.5, 2.0};
        const auto x = thomas_solve(z, one, z, rhs);
        for (int i = 0; i < 4; ++i) CHECK(x[i] == rhs[i]);
    }
    {
        // random diagonally dominant system against the dense reference
        const int n = 50;
        std::mt19937 rng(41);
        std::uniform_real_distribution<double> ud(-1.0, 1.0);
        std::vector<double> lower(n), diag(n), upper(n), rhs(n);
        for (int i = 0; i < n; ++i) {
            lower[i] = (i > 0) ? ud(rng) : 0.0;
            upper[i] = (i < n - 1) ? ud(rng) : 0.0;
            diag[i] = 3.0 + std::abs(ud(rng));
            rhs[i] = ud(rng);
        }
        const auto x = thomas_solve(lower, diag, upper, rhs);
        std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
        for (int i = 0; i < n; ++i) {
            a[i][i] = diag[i];
            if (i > 0) a[i][i - 1] = lower[i];
            if (i < n - 1) a[i][i + 1] = upper[i];
        }
        const auto ref = dense_solve(a, rhs);
        double maxdiff = 0.0;
        for (int i = 0; i < n; ++i) maxdiff = std::max(maxdiff, std::abs(x[i] - ref[i]));
        CHECK(maxdiff < 1e-10);
    }
    {
        const std::vector<double> lower = {0, 1}, diag = {0, 1}, upper = {1, 0};
        CHECK_THROWS_AS(thomas_solve(lower, diag, upper, std::vector<double>{1, 1}),
                        numerical_error);
    }
}

TEST_CASE("factorization reuse matches repeated solves") {
    const std::vector<double> lower = {0, -1, -1, -1}, diag = {3, 3, 3, 3},
                              upper = {-1, -1, -1, 0};
    TridiagonalFactor f(lower, diag, upper);
    std::vector<double> r1 = {1, 2, 3, 4}, r2 = {4, 3, 2, 1};
    auto a = thomas_solve(lower, diag, upper, r1);
    auto b = thomas_solve(lower, diag, upper, r2);
    f.solve_in_place(r1);
    f.solve_in_place(r2);
    for (int i = 0; i < 4; ++i) {
        CHECK(r1[i] == a[i]);
        CHECK(r2[i] == b[i]);
    }
}

TEST_CASE("1d cosine problem converges at second order") {
    const double lam = 0.11, t = 1.0;
    const double exact = std::exp(-lam * t);
    std::vector<double> errs;
    for (auto [j, m] : {std::pair{50, 6}, std::pair{100, 12}, std::pair{200, 24}}) {
        const double v = solve_subproblem(cosine_problem({lam}, t, j, m));
        errs.push_back(std::abs(v - exact));
    }
    CHECK(errs.back() < 5e-6);
    const double order = fitted_order(errs);
    CHECK(order > 1.7);
    CHECK(order < 2.3);
}

TEST_CASE("2d cosine problem converges at second order") {
    const double t = 1.0;
    const std::vector<double> lam = {0.11, 0.01};
    const double exact = std::exp(-0.12 * t);
    std::vector<double> errs;
    for (auto [j, m] : {std::pair{50, 6}, std::pair{100, 12}, std::pair{200, 24}}) {
        const double v = solve_subproblem(cosine_problem(lam, t, j, m));
        errs.push_back(std::abs(v - exact));
    }
    const double order = fitted_order(errs);
    CHECK(order > 1.7);
    CHECK(order < 2.3);
}

TEST_CASE("3d cosine problem matches the closed form") {
    const double t = 1.0;
    const std::vector<double> lam = {0.06, 0.01, 0.01};
    const double exact = std::exp(-0.08 * t);
    const double v = solve_subproblem(cosine_problem(lam, t, 60, 10));
    CHECK(std::abs(v - exact) < 5e-4);
}

TEST_CASE("constant data is preserved") {
    for (int dim : {1, 2}) {
        SubProblem p = cosine_problem(std::vector<double>(dim, 0.05), 1.0, 40, 8);
        p.initial = [](std::span<const double>) { return 3.7; };
        const SubProblemField f = solve_subproblem_field(p);
        for (double v : f.field) CHECK(std::abs(v - 3.7) < 1e-12);
    }
}

TEST_CASE("discrete maximum principle on the cosine grids") {
    for (int dim : {1, 2}) {
        SubProblem p = cosine_problem(std::vector<double>(dim, 0.08), 1.0, 40, 8);
        const SubProblemField f = solve_subproblem_field(p);
        for (double v : f.field) {
            CHECK(v <= 1.0 + 1e-12);
            CHECK(v >= -1.0 - 1e-12);
        }
    }
}

TEST_CASE("discrete maximum principle on a clamped call grid") {
    SubProblem p = cosine_problem({0.055, 0.01}, 1.0, 100, 12);
    p.cutoff = 1000.0;
    p.initial = [](std::span<const double> z) {
        const double basket = 60.0 * std::exp(std::min(z[0], 600.0)) +
                              40.0 * std::exp(std::min(z[1], 600.0));
        return std::max(basket - 100.0, 0.0);
    };
    const SubProblemField f = solve_subproblem_field(p);
    const double eps = 1e-12 * 1000.0;  // roundoff allowance scales with the data
    for (double v : f.field) {
        CHECK(v >= -eps);
        CHECK(v <= 1000.0 + eps);
    }
}

TEST_CASE("anchor value is the grid node, bit for bit") {
    SubProblem p = cosine_problem({0.11, 0.02}, 1.0, 40, 6);
    const double v = solve_subproblem(p);
    const SubProblemField f = solve_subproblem_field(p);
    CHECK(v == f.field[f.anchor_index]);
    CHECK(f.anchor_index == 20u * 41u + 20u);
}

TEST_CASE("sub-problem validation") {
    SubProblem p = cosine_problem({0.1, 0.1, 0.1}, 1.0, 20, 4);
    p.subset = IndexSet{1, 2, 3, 4};
    p.lambdas.push_back(0.1);
    p.axes.push_back(choose_axis(0.1, 1.0, 0.0, 20));
    CHECK_THROWS_AS(solve_subproblem(p), validation_error);  // 4d unsupported

    SubProblem bad = cosine_problem({0.1}, 1.0, 20, 4);
    bad.lambdas[0] = -0.1;
    CHECK_THROWS_AS(solve_subproblem(bad), validation_error);

    SubProblem odd = cosine_problem({0.1}, 1.0, 20, 4);
    odd.axes[0].j_points = 21;
    CHECK_THROWS_AS(solve_subproblem(odd), validation_error);
}
