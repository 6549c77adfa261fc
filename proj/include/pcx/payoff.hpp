#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcx/model.hpp"

namespace pcx {

enum class PayoffKind {
    arithmetic_basket_call,  // max(sum_i w_i S_i - K, 0)
    geometric_basket_call,   // max(prod_i S_i^{w_i} - K, 0)
    digital_geometric_call,  // 1{prod_i S_i^{w_i} >= K}
    cosine_product,          // prod_k cos(z_k), defined in z directly
    custom,                  // arbitrary h(S)
};

struct PayoffSpec {
    PayoffKind kind = PayoffKind::arithmetic_basket_call;
    std::vector<double> weights;
    double strike = 0.0;
    std::function<double(std::span<const double>)> custom_h;  // h(S), kind == custom

    void validate(int n_assets) const;
};

/// Payoff in asset space. Geometric kinds reject nonpositive prices.
double payoff_value(const PayoffSpec& payoff, std::span<const double> s);

/// Pullback to principal coordinates at t = 0: g(z) = h(exp(Q z));
/// for cosine_product, g(z) = prod_k cos(z_k) directly.
std::function<double(std::span<const double>)> initial_condition(const PayoffSpec& payoff,
                                                                 const CoordinateMap& map);

/// Named weight presets used by the reference experiments:
///   arith-omega1/2/3      ten-asset arithmetic baskets, K = 100
///   arith5-omega1/2       five-asset arithmetic baskets, K = 100
///   geom-q1               geometric basket along (1,..,1)/sqrt(10), K = 1
///   geom-orth1/2          geometric baskets orthogonal to (1,..,1), K = 1
///   cosine                product of cosines (no parameters)
PayoffSpec preset_payoff(std::string_view name);

/// Names accepted by preset_payoff, for CLI help and error messages.
std::vector<std::string> payoff_preset_names();

}  // namespace pcx
