#include <doctest.h>

#include <random>

#include "pcx/model.hpp"

using namespace pcx;

namespace {

ModelSpec equicorr(int n, double sigma, double gamma) {
    return ModelSpec::equicorrelated(n, sigma, gamma, 100.0, 100.0,
                                     std::vector<double>(n, 1.0 / n));
}

}  // namespace

TEST_CASE("covariance assembly") {
    const Eigen::MatrixXd cov2 = build_covariance(equicorr(2, 0.2, 0.5));
    CHECK(cov2(0, 0) == doctest::Approx(0.04).epsilon(1e-14));
    CHECK(cov2(0, 1) == doctest::Approx(0.02).epsilon(1e-14));
    CHECK(cov2(1, 0) == doctest::Approx(0.02).epsilon(1e-14));

    const Eigen::MatrixXd cov10 = build_covariance(equicorr(10, 0.2, 0.5));
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
            CHECK(cov10(i, j) == doctest::Approx(i == j ? 0.04 : 0.02).epsilon(1e-14));

    const Eigen::MatrixXd diag = build_covariance(equicorr(3, 0.3, 0.0));
    CHECK(diag.isApprox(Eigen::MatrixXd::Identity(3, 3) * 0.09, 1e-14));
}

TEST_CASE("non-psd correlation rejected") {
    // n=4 with gamma < -1/3 makes 1 + 3 gamma negative.
    CHECK_THROWS_AS(equicorr(4, 0.2, -0.5), validation_error);
    ModelSpec bad = equicorr(2, 0.2, 0.5);
    bad.correlation(0, 1) = 0.7;  // asymmetric
    CHECK_THROWS_AS(bad.validate(), validation_error);
}

TEST_CASE("spectrum of a diagonal matrix") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 0.3;
    d(1, 1) = 0.1;
    const Spectrum sp = spectrum(d);
    CHECK(sp.lambdas(0) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(sp.lambdas(1) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(std::abs(sp.q(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(sp.q(1, 1)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spectrum matches the published eigenvalue table") {
    const Spectrum sp = spectrum(build_covariance(equicorr(10, 0.2, 0.5)));
    CHECK(sp.lambdas(0) == doctest::Approx(0.220).epsilon(1e-12));
    for (int i = 1; i < 10; ++i)
        CHECK(sp.lambdas(i) == doctest::Approx(0.020).epsilon(1e-10));
    // heat-equation coefficients are half the table values
    CHECK(sp.heat_coefficients()(0) == doctest::Approx(0.110).epsilon(1e-12));
}

TEST_CASE("spectrum reconstruction and orthonormality") {
    std::mt19937 rng(7);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd a(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = nd(rng);
    const Eigen::MatrixXd psd = a.transpose() * a;
    const Spectrum sp = spectrum(psd);

    CHECK((sp.q.transpose() * sp.q - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <
          1e-10);
    const Eigen::MatrixXd rebuilt = sp.q * sp.lambdas.asDiagonal() * sp.q.transpose();
    CHECK((rebuilt - psd).cwiseAbs().maxCoeff() < 1e-9);
    for (int i = 0; i + 1 < 4; ++i) CHECK(sp.lambdas(i) >= sp.lambdas(i + 1));
    // eigen equation and trace preservation
    for (int i = 0; i < 4; ++i)
        CHECK((psd * sp.q.col(i) - sp.lambdas(i) * sp.q.col(i)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(sp.lambdas.sum() == doctest::Approx(psd.trace()).epsilon(1e-10));
}

TEST_CASE("spectrum rejects asymmetric input") {
    Eigen::MatrixXd a(2, 2);
    a << 1.0, 0.2, 0.3, 1.0;
    CHECK_THROWS_AS(spectrum(a), validation_error);
}

TEST_CASE("tiny negative eigenvalues are clamped, larger ones rejected") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
    a(0, 0) = 0.1;
    a(1, 1) = -1e-13;
    const Spectrum sp = spectrum(a);
    CHECK(sp.lambdas(1) == 0.0);

    a(1, 1) = -1e-6;
    CHECK_THROWS_AS(spectrum(a), validation_error);
}

TEST_CASE("equicorrelation closed form") {
    {
        auto [l1, l2] = equicorrelation_spectrum(0.2, 0.9, 10);
        CHECK(l1 == doctest::Approx(0.364).epsilon(1e-14));
        CHECK(l2 == doctest::Approx(0.004).epsilon(1e-14));
    }
    {
        auto [l1, l2] = equicorrelation_spectrum(0.2, 0.5, 5);
        CHECK(l1 == doctest::Approx(0.120).epsilon(1e-14));
        CHECK(l2 == doctest::Approx(0.020).epsilon(1e-14));
    }
    {
        auto [l1, l2] = equicorrelation_spectrum(0.3, 0.0, 6);
        CHECK(l1 == doctest::Approx(0.09).epsilon(1e-14));
        CHECK(l2 == doctest::Approx(0.09).epsilon(1e-14));
    }
    CHECK_THROWS_AS(equicorrelation_spectrum(0.2, 1.0, 5), validation_error);
    CHECK_THROWS_AS(equicorrelation_spectrum(0.2, -1.2, 5), validation_error);
}

TEST_CASE("closed form agrees with the eigensolver across gamma and n") {
    for (int n = 2; n <= 12; ++n) {
        for (double gamma : {0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.98, 0.99}) {
            auto [l1, l2] = equicorrelation_spectrum(0.2, gamma, n);
            const Eigen::MatrixXd cov = build_covariance(equicorr(n, 0.2, gamma));
            const Spectrum sp = spectrum(cov);
            CHECK(std::abs(sp.lambdas(0) - l1) < 1e-10);
            CHECK(std::abs(sp.lambdas(1) - l2) < 1e-10);
            CHECK(std::abs(sp.lambdas.sum() - cov.trace()) < 1e-10);
        }
    }
}

TEST_CASE("leading equicorrelation eigenvector is the normalized ones vector") {
    const Spectrum sp = spectrum(build_covariance(equicorr(7, 0.2, 0.6)));
    const double c = 1.0 / std::sqrt(7.0);
    for (int i = 0; i < 7; ++i) CHECK(sp.q(i, 0) == doctest::Approx(c).epsilon(1e-10));
}

TEST_CASE("coordinate map") {
    const ModelSpec spec = equicorr(3, 0.2, 0.5);
    const Spectrum sp = spectrum(build_covariance(spec));
    const CoordinateMap map = coordinate_map(spec, sp);

    SUBCASE("identity rotation, zero drift") {
        CoordinateMap id;
        id.q = Eigen::MatrixXd::Identity(3, 3);
        id.mu = Eigen::VectorXd::Zero(3);
        id.horizon = 1.0;
        Eigen::VectorXd x(3);
        x << 0.3, -1.0, 2.0;
        CHECK((id.to_principal(x, 0.7) - x).norm() == doctest::Approx(0.0).epsilon(1e-15));
    }

    SUBCASE("t = 0 is the plain rotation") {
        Eigen::VectorXd x(3);
        x << 1.0, 2.0, 3.0;
        CHECK((map.to_principal(x, 0.0) - map.q.transpose() * x).norm() < 1e-14);
    }

    SUBCASE("round trip is the identity") {
        std::mt19937 rng(11);
        std::normal_distribution<double> nd;
        for (int rep = 0; rep < 20; ++rep) {
            Eigen::VectorXd x(3);
            for (int i = 0; i < 3; ++i) x(i) = 3.0 * nd(rng);
            const double t = std::abs(nd(rng));
            const Eigen::VectorXd back = map.from_principal(map.to_principal(x, t), t);
            CHECK((back - x).cwiseAbs().maxCoeff() < 1e-12);
        }
    }

    SUBCASE("anchor") {
        const Eigen::VectorXd z = map.anchor(spec.spot);
        Eigen::VectorXd logs(3);
        logs.setConstant(std::log(100.0));
        CHECK((z - map.q.transpose() * (logs + map.mu * spec.horizon)).cwiseAbs().maxCoeff() <
              1e-13);
        CHECK(map.mu(0) == doctest::Approx(-0.02).epsilon(1e-14));
    }
}
