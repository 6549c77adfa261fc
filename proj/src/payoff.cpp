#include "pcx/payoff.hpp"

#include <cmath>

namespace pcx {

void PayoffSpec::validate(int n_assets) const {
    if (kind == PayoffKind::cosine_product) return;
    if (kind == PayoffKind::custom) {
        if (!custom_h) throw validation_error("payoff: custom kind needs a callable");
        return;
    }
    if (static_cast<int>(weights.size()) != n_assets)
        throw validation_error("payoff: weights length must equal n_assets");
}

double payoff_value(const PayoffSpec& payoff, std::span<const double> s) {
    switch (payoff.kind) {
        case PayoffKind::arithmetic_basket_call: {
            double basket = 0.0;
            for (size_t i = 0; i < s.size(); ++i) basket += payoff.weights[i] * s[i];
            return std::max(basket - payoff.strike, 0.0);
        }
        case PayoffKind::geometric_basket_call:
        case PayoffKind::digital_geometric_call: {
            double logb = 0.0;
            for (size_t i = 0; i < s.size(); ++i) {
                if (!(s[i] > 0.0))
                    throw validation_error("payoff: geometric kinds need positive prices");
                logb += payoff.weights[i] * std::log(s[i]);
            }
            if (payoff.kind == PayoffKind::digital_geometric_call)
                return logb >= std::log(payoff.strike) ? 1.0 : 0.0;
            return std::max(std::exp(logb) - payoff.strike, 0.0);
        }
        case PayoffKind::cosine_product: {
            double prod = 1.0;
            for (double zk : s) prod *= std::cos(zk);
            return prod;
        }
        case PayoffKind::custom:
            return payoff.custom_h(s);
    }
    throw validation_error("payoff: unknown kind");
}

std::function<double(std::span<const double>)> initial_condition(const PayoffSpec& payoff,
                                                                 const CoordinateMap& map) {
    if (payoff.kind == PayoffKind::cosine_product) {
        return [](std::span<const double> z) {
            double prod = 1.0;
            for (double zk : z) prod *= std::cos(zk);
            return prod;
        };
    }
    // Exponent arguments are capped so far-field grid nodes stay finite;
    // anything near the cap is many hundreds of standard deviations out.
    const Eigen::MatrixXd q = map.q;
    PayoffSpec p = payoff;
    return [q, p](std::span<const double> z) {
        const int n = static_cast<int>(q.rows());
        std::vector<double> s(n);
        for (int i = 0; i < n; ++i) {
            double xi = 0.0;
            for (int k = 0; k < n; ++k) xi += q(i, k) * z[k];
            s[i] = std::exp(std::min(xi, 700.0));
        }
        return payoff_value(p, s);
    };
}

namespace {

PayoffSpec arith(std::vector<double> w, double strike) {
    PayoffSpec p;
    p.kind = PayoffKind::arithmetic_basket_call;
    p.weights = std::move(w);
    p.strike = strike;
    return p;
}

PayoffSpec geom(std::vector<double> w, double strike) {
    PayoffSpec p;
    p.kind = PayoffKind::geometric_basket_call;
    p.weights = std::move(w);
    p.strike = strike;
    return p;
}

}  // namespace

PayoffSpec preset_payoff(std::string_view name) {
    if (name == "arith-omega1") return arith(std::vector<double>(10, 0.1), 100.0);
    if (name == "arith-omega2") {
        std::vector<double> w(10, 2.0 / 30.0);
        for (int i = 0; i < 5; ++i) w[i] = 4.0 / 30.0;
        return arith(std::move(w), 100.0);
    }
    if (name == "arith-omega3") {
        std::vector<double> w(10, 0.25);
        for (int i = 7; i < 10; ++i) w[i] = -0.25;
        return arith(std::move(w), 100.0);
    }
    if (name == "arith5-omega1") return arith({1.0, -1.0, 1.0, -1.0, 1.0}, 100.0);
    if (name == "arith5-omega2") return arith({1.5, 1.5, -0.5, -0.5, -1.0}, 100.0);
    if (name == "geom-q1") {
        const double c = 1.0 / std::sqrt(10.0);
        return geom(std::vector<double>(10, c), 1.0);
    }
    if (name == "geom-orth1") {
        return geom({-0.1160, 0.0929, -0.6527, -0.1121, 0.6986, 0.2091, -0.0438, -0.0758,
                     0.0000, 0.000},
                    1.0);
    }
    if (name == "geom-orth2") {
        return geom({0.1130, -0.0607, -0.1708, -0.2057, 0.8971, -0.2467, -0.1831, -0.1085,
                     -0.0345, -0.0001},
                    1.0);
    }
    if (name == "cosine") {
        PayoffSpec p;
        p.kind = PayoffKind::cosine_product;
        return p;
    }
    throw validation_error("unknown payoff preset: " + std::string(name));
}

std::vector<std::string> payoff_preset_names() {
    return {"arith-omega1", "arith-omega2", "arith-omega3", "arith5-omega1",
            "arith5-omega2", "geom-q1",      "geom-orth1",   "geom-orth2",
            "cosine"};
}

}  // namespace pcx
