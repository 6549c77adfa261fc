#pragma once

#include <span>

#include "pcx/expansion.hpp"
#include "pcx/model.hpp"

namespace pcx {

/// Standard normal cdf via erfc; absolute error well below 1e-12 everywhere.
double normal_cdf(double x);
double normal_pdf(double x);

/// E[max(e^X - K, 0)] for X ~ N(mean, variance). Degenerate variance falls
/// back to the intrinsic value max(e^mean - K, 0).
double lognormal_call(double mean, double variance, double strike);

/// Product-of-cosines reference family: with initial data prod_k cos(z_k) the
/// sub-solution diffusing only in the directions of `nu` is
///   u^nu(z,t) = exp(-t sum_{k in nu} lambda_k) prod_{k=1..n} cos(z_k).
/// `lambdas` are heat-equation diffusion coefficients. nu = {1..n} gives the
/// full solution, nu = {} the undiffused initial data.
double cosine_solution(std::span<const double> z, double t,
                       std::span<const double> lambdas, const IndexSet& nu);

/// Price of max(prod_i S_i^{w_i} - K, 0): the log-basket is normal with mean
/// sum_i w_i (log S_i0 + (r_f - sigma_i^2/2) T) and variance w' Sigma w T.
double geometric_call_price(const ModelSpec& model, std::span<const double> omega,
                            double strike);

/// Price of 1{prod_i S_i^{w_i} >= K}: Phi((mean - log K) / sqrt(w' Sigma w T)).
double digital_geometric_price(const ModelSpec& model, std::span<const double> omega,
                               double strike);

/// Closed-form d/d lambda2 of the two-dimensional reference problems
/// (digital and standard calls on a 2-asset geometric basket after rotation).
/// Cases by payoff gradient direction relative to the expansion direction:
/// 1 orthogonal (derivative is identically 0), 2 parallel, 3 diagonal.
enum class Lambda2Case {
    digital_orthogonal,   // depends only on z1; derivative 0
    digital_parallel,     // depends only on z2
    digital_diagonal,     // depends on z1 + z2
    call_parallel,        // standard call on e^{z2}
};

double lambda2_derivative(Lambda2Case c, double z1, double z2, double t,
                          double lambda1, double lambda2, double strike);

}  // namespace pcx
