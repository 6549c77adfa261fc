#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pcx/expansion.hpp"
#include "pcx/model.hpp"
#include "pcx/payoff.hpp"

namespace pcx {

struct MCConfig {
    std::int64_t n_samples = 1'000'000;
    std::uint64_t seed = 42;
    std::int64_t batch = 1 << 16;  // reduction is ordered by batch index
    bool antithetic = false;
    // Batches are pure functions of (seed, index) and may run concurrently;
    // the combine order is fixed by batch index, so results are identical.
    bool parallel = true;

    void validate() const;
};

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n_used = 0;
};

/// Counter-based stream: values are a pure function of (seed, key, index), so
/// batches can be evaluated independently and reduced in index order with
/// bit-identical results.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t key);
    /// Fills `out` with the standard normals for the given flat sample index.
    void fill(std::uint64_t sample_index, std::span<double> out) const;

private:
    std::uint64_t base_;
};

/// Inverse standard normal cdf (Wichura AS241), relative error ~1e-15.
double normal_quantile(double p);

/// Terminal point of the principal-coordinate diffusion:
/// z_k(T) = anchor_k + sqrt(2 lambda_k T) zeta_k. Zero lambda freezes the
/// coordinate; negative lambda is rejected.
std::vector<double> sample_terminal_z(std::span<const double> lambdas,
                                      std::span<const double> anchor, double horizon,
                                      std::span<const double> normals);

/// A pricing problem expressed in principal coordinates: diffusion
/// coefficients, anchor, horizon, and the initial data g(z).
struct ZProblem {
    std::vector<double> lambdas;  // heat coefficients, >= 0
    std::vector<double> anchor;
    double horizon = 1.0;
    std::function<double(std::span<const double>)> g;

    static ZProblem from_market(const ModelSpec& model, const PayoffSpec& payoff);
};

/// Plain estimator of E[g(z_T)] at the full coefficient vector.
MCEstimate estimate_price(const ZProblem& problem, const MCConfig& cfg);
MCEstimate estimate_price(const ModelSpec& model, const PayoffSpec& payoff,
                          const MCConfig& cfg);

/// Coupled estimator of the mixed difference Delta^alpha u at the anchored
/// coefficient vector lambda0 = (lambda_1..lambda_r, 0, ..., 0):
/// the sum over beta <= alpha of (-1)^{|alpha-beta|} g(z_T(lambda0 + dlambda.beta))
/// with common random numbers across all beta evaluations. alpha is a 0/1
/// vector with alpha_k = 0 for k <= r. In antithetic mode the sum is averaged
/// over all sign flips of the differenced coordinates' draws, which cancels
/// the odd-order terms pathwise and brings the single-sample variance down to
/// O(prod_k lambda_k^2).
///
/// Different alpha get independent streams derived from (seed, alpha);
/// `stream_key` overrides the derivation so callers can couple across alpha.
MCEstimate estimate_alpha_difference(const ZProblem& problem, std::span<const int> alpha,
                                     int r, const MCConfig& cfg,
                                     std::optional<std::uint64_t> stream_key = {});
MCEstimate estimate_alpha_difference(const ModelSpec& model, const PayoffSpec& payoff,
                                     std::span<const int> alpha, int r, const MCConfig& cfg,
                                     std::optional<std::uint64_t> stream_key = {});

/// Coupled estimator of the truncation error u - u^xi: the mean of
/// g(z_T(lambda)) - sum_{(w,nu)} w g(z_T(lambda masked to nu)) over shared
/// draws, where the mask zeroes every coefficient outside nu.
MCEstimate estimate_truncation_error(const ZProblem& problem, const ExpansionPlan& plan,
                                     const MCConfig& cfg);
MCEstimate estimate_truncation_error(const ModelSpec& model, const PayoffSpec& payoff,
                                     const ExpansionPlan& plan, const MCConfig& cfg);

}  // namespace pcx
