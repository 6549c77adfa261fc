#include "pcx/oracle.hpp"

#include <cmath>

namespace pcx {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt2Pi = 2.5066282746310002;
}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

double lognormal_call(double mean, double variance, double strike) {
    if (strike <= 0.0) return std::exp(mean + variance / 2.0) - strike;
    if (variance <= 0.0) return std::max(std::exp(mean) - strike, 0.0);
    const double sd = std::sqrt(variance);
    const double d2 = (mean - std::log(strike)) / sd;
    const double d1 = d2 + sd;
    return std::exp(mean + variance / 2.0) * normal_cdf(d1) - strike * normal_cdf(d2);
}

double cosine_solution(std::span<const double> z, double t,
                       std::span<const double> lambdas, const IndexSet& nu) {
    const int n = static_cast<int>(z.size());
    if (static_cast<int>(lambdas.size()) != n)
        throw validation_error("cosine_solution: z and lambdas size mismatch");
    nu.validate(n);
    double decay = 0.0;
    for (int k : nu.indices) decay += lambdas[k - 1];
    double prod = 1.0;
    for (int k = 0; k < n; ++k) prod *= std::cos(z[k]);
    return std::exp(-t * decay) * prod;
}

namespace {

// Mean and variance of the terminal log-basket sum_i w_i log S_{i,T}.
std::pair<double, double> log_basket_moments(const ModelSpec& model,
                                             std::span<const double> omega) {
    if (static_cast<int>(omega.size()) != model.n_assets)
        throw validation_error("geometric oracle: omega length must equal n_assets");
    const Eigen::MatrixXd cov = build_covariance(model);
    double mean = 0.0;
    for (int i = 0; i < model.n_assets; ++i)
        mean += omega[i] * (std::log(model.spot[i]) +
                            (model.risk_free - 0.5 * model.sigma[i] * model.sigma[i]) *
                                model.horizon);
    double var = 0.0;
    for (int i = 0; i < model.n_assets; ++i)
        for (int j = 0; j < model.n_assets; ++j)
            var += omega[i] * cov(i, j) * omega[j];
    var *= model.horizon;
    return {mean, var};
}

}  // namespace

double geometric_call_price(const ModelSpec& model, std::span<const double> omega,
                            double strike) {
    if (!(strike > 0.0)) throw validation_error("geometric_call_price: strike must be > 0");
    auto [mean, var] = log_basket_moments(model, omega);
    return lognormal_call(mean, var, strike);
}

double digital_geometric_price(const ModelSpec& model, std::span<const double> omega,
                               double strike) {
    if (!(strike > 0.0)) throw validation_error("digital_geometric_price: strike must be > 0");
    auto [mean, var] = log_basket_moments(model, omega);
    if (var <= 0.0) return mean >= std::log(strike) ? 1.0 : 0.0;
    return normal_cdf((mean - std::log(strike)) / std::sqrt(var));
}

double lambda2_derivative(Lambda2Case c, double z1, double z2, double t,
                          double lambda1, double lambda2, double strike) {
    if (!(t > 0.0)) throw validation_error("lambda2_derivative: t must be > 0");
    if (!(strike > 0.0)) throw validation_error("lambda2_derivative: strike must be > 0");
    const double lnk = std::log(strike);

    switch (c) {
        case Lambda2Case::digital_orthogonal:
            return 0.0;

        case Lambda2Case::digital_parallel: {
            // u = Phi((z2 - ln K) / sqrt(2 lambda2 t))
            if (!(lambda2 > 0.0))
                throw validation_error("lambda2_derivative: digital_parallel needs lambda2 > 0");
            const double a = z2 - lnk;
            return -a / (2.0 * std::sqrt(2.0 * t) * std::pow(lambda2, 1.5)) *
                   normal_pdf(a / std::sqrt(2.0 * lambda2 * t));
        }

        case Lambda2Case::digital_diagonal: {
            // u = Phi((z1 + z2 - ln K) / sqrt(2 (lambda1 + lambda2) t))
            const double ls = lambda1 + lambda2;
            if (!(ls > 0.0))
                throw validation_error("lambda2_derivative: digital_diagonal needs lambda1+lambda2 > 0");
            const double a = z1 + z2 - lnk;
            const double sd = std::sqrt(2.0 * ls * t);
            return -a / (2.0 * ls * sd) * normal_pdf(a / sd);
        }

        case Lambda2Case::call_parallel: {
            // u = F Phi(d1) - K Phi(d2), F = e^{z2 + lambda2 t}, v = 2 lambda2 t;
            // d/d lambda2 u = t [F Phi(d1) + F pdf(d1)/sqrt(v)] = t d2u/dz2^2.
            if (!(lambda2 > 0.0))
                throw validation_error("lambda2_derivative: call_parallel needs lambda2 > 0");
            const double v = 2.0 * lambda2 * t;
            const double sd = std::sqrt(v);
            const double fwd = std::exp(z2 + lambda2 * t);
            const double d1 = (z2 - lnk + v) / sd;
            return t * fwd * (normal_cdf(d1) + normal_pdf(d1) / sd);
        }
    }
    throw validation_error("lambda2_derivative: unknown case");
}

}  // namespace pcx
