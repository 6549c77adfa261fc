#include <doctest.h>

#include <cmath>
#include <random>

#include "pcx/payoff.hpp"

using namespace pcx;

TEST_CASE("payoff values in asset space") {
    PayoffSpec arith;
    arith.kind = PayoffKind::arithmetic_basket_call;
    arith.weights.assign(10, 0.1);
    arith.strike = 100.0;
    std::vector<double> s(10, 100.0);
    CHECK(payoff_value(arith, s) == doctest::Approx(0.0));
    s.assign(10, 110.0);
    CHECK(payoff_value(arith, s) == doctest::Approx(10.0).epsilon(1e-13));

    PayoffSpec digital;
    digital.kind = PayoffKind::digital_geometric_call;
    digital.weights = {0.5, 0.5};
    digital.strike = 2.0;
    CHECK(payoff_value(digital, std::vector<double>{6.25, 6.25}) == doctest::Approx(1.0));
    CHECK(payoff_value(digital, std::vector<double>{1.0, 1.0}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(payoff_value(digital, std::vector<double>{-1.0, 2.0}), validation_error);
}

TEST_CASE("pullback to principal coordinates") {
    SUBCASE("identity rotation, single-asset geometric") {
        CoordinateMap id;
        id.q = Eigen::MatrixXd::Identity(3, 3);
        id.mu = Eigen::VectorXd::Zero(3);
        id.horizon = 1.0;
        PayoffSpec p;
        p.kind = PayoffKind::geometric_basket_call;
        p.weights = {1.0, 0.0, 0.0};
        p.strike = 1.5;
        auto g = initial_condition(p, id);
        for (double z1 : {-1.0, 0.2, 1.3}) {
            const std::vector<double> z = {z1, 0.4, -2.0};
            CHECK(g(z) == doctest::Approx(std::max(std::exp(z1) - 1.5, 0.0)).epsilon(1e-13));
        }
    }

    SUBCASE("cosine data at the origin") {
        PayoffSpec p;
        p.kind = PayoffKind::cosine_product;
        CoordinateMap id;
        auto g = initial_condition(p, id);
        CHECK(g(std::vector<double>{0.0, 0.0, 0.0, 0.0}) == doctest::Approx(1.0));
    }

    SUBCASE("pullback consistency across random states") {
        const ModelSpec spec =
            ModelSpec::equicorrelated(10, 0.2, 0.5, 100.0, 100.0, std::vector<double>(10, 0.1));
        const Spectrum sp = spectrum(build_covariance(spec));
        const CoordinateMap map = coordinate_map(spec, sp);
        PayoffSpec p = preset_payoff("arith-omega1");
        auto g = initial_condition(p, map);

        // at the spot itself: g(Q' log S0) = payoff(S0)
        Eigen::VectorXd logs(10);
        logs.setConstant(std::log(100.0));
        const Eigen::VectorXd zspot = map.to_principal(logs, 0.0);
        std::vector<double> zv(zspot.data(), zspot.data() + 10);
        CHECK(g(zv) == doctest::Approx(payoff_value(p, spec.spot)).epsilon(1e-10));

        std::mt19937 rng(23);
        std::normal_distribution<double> nd;
        for (int rep = 0; rep < 1000; ++rep) {
            std::vector<double> s(10);
            Eigen::VectorXd x(10);
            for (int i = 0; i < 10; ++i) {
                x(i) = std::log(100.0) + 0.5 * nd(rng);
                s[i] = std::exp(x(i));
            }
            const Eigen::VectorXd z = map.to_principal(x, 0.0);
            std::vector<double> zvec(z.data(), z.data() + 10);
            const double lhs = g(zvec);
            const double rhs = payoff_value(p, s);
            CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
        }
    }

    SUBCASE("geometric payoff is constant orthogonal to the weight direction") {
        const ModelSpec spec =
            ModelSpec::equicorrelated(4, 0.2, 0.5, 100.0, 1.0, {0.3, -0.2, 0.4, 0.1});
        const Spectrum sp = spectrum(build_covariance(spec));
        const CoordinateMap map = coordinate_map(spec, sp);
        PayoffSpec p;
        p.kind = PayoffKind::geometric_basket_call;
        p.weights = spec.weights;
        p.strike = 1.0;
        auto g = initial_condition(p, map);

        Eigen::VectorXd w(4);
        for (int i = 0; i < 4; ++i) w(i) = p.weights[i];
        const Eigen::VectorXd a = sp.q.transpose() * w;  // payoff direction in z
        // any direction orthogonal to a leaves g unchanged
        Eigen::VectorXd d = Eigen::VectorXd::Zero(4);
        d(0) = a(1);
        d(1) = -a(0);
        std::vector<double> z0 = {0.1, -0.2, 0.3, 0.7};
        const std::vector<double> z1 = {z0[0] + 0.5 * d(0), z0[1] + 0.5 * d(1), z0[2], z0[3]};
        CHECK(g(z0) == doctest::Approx(g(z1)).epsilon(1e-12));
    }
}

TEST_CASE("payoff presets") {
    for (const auto& name : payoff_preset_names()) CHECK_NOTHROW(preset_payoff(name));
    CHECK_THROWS_AS(preset_payoff("nope"), validation_error);

    const PayoffSpec w1 = preset_payoff("arith-omega1");
    double sum = 0.0;
    for (double w : w1.weights) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(w1.strike == 100.0);

    const PayoffSpec w3 = preset_payoff("arith-omega3");
    CHECK(w3.weights[0] == doctest::Approx(0.25));
    CHECK(w3.weights[9] == doctest::Approx(-0.25));

    const PayoffSpec k1 = preset_payoff("geom-orth1");
    double dot = 0.0, norm = 0.0;
    for (double w : k1.weights) {
        dot += w;
        norm += w * w;
    }
    // orthogonal to the ones vector and unit length, up to print truncation
    CHECK(std::abs(dot) < 5e-4);
    CHECK(norm == doctest::Approx(1.0).epsilon(2e-3));
}
