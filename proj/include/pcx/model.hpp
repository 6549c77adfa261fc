#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "pcx/errors.hpp"

namespace pcx {

/// Multi-asset lognormal market: N assets with constant volatilities and a
/// constant correlation matrix. All rates are annualized, horizon in years.
struct ModelSpec {
    int n_assets = 0;
    std::vector<double> sigma;     // per sqrt-year, one per asset, > 0
    Eigen::MatrixXd correlation;   // symmetric, unit diagonal, PSD
    double risk_free = 0.0;
    double horizon = 1.0;
    std::vector<double> spot;      // initial prices, > 0
    double strike = 0.0;
    std::vector<double> weights;   // payoff weights, one per asset

    /// Equicorrelated market with identical sigma/spot across assets.
    static ModelSpec equicorrelated(int n, double sigma, double gamma, double spot,
                                    double strike, std::vector<double> weights,
                                    double horizon = 1.0);

    void validate() const;  // throws validation_error
};

/// Covariance matrix Sigma_ij = sigma_i sigma_j rho_ij. Validates the spec.
Eigen::MatrixXd build_covariance(const ModelSpec& spec);

/// Eigendecomposition of a symmetric PSD matrix, eigenvalues sorted descending.
///
/// For the market covariance these lambdas match the published eigenvalue
/// tables (e.g. lambda1 = sigma^2((N-1)gamma+1) for the equicorrelated case).
/// The rotated heat equation du/dt = sum_k lambda_k^heat d2u/dz_k^2 that prices
/// the market uses half these values; heat_coefficients() is the single place
/// that factor lives.
struct Spectrum {
    Eigen::MatrixXd q;        // orthonormal eigenvectors, one per column
    Eigen::VectorXd lambdas;  // eigenvalues of the input matrix, descending, >= 0

    Eigen::VectorXd heat_coefficients() const { return lambdas / 2.0; }
    int size() const { return static_cast<int>(lambdas.size()); }
};

/// Eigenpairs of `matrix`, descending. Eigenvector signs are fixed so the
/// largest-magnitude entry of each column is positive. Eigenvalues in
/// [-1e-12, 0) are clamped to 0; asymmetric or more negative input is rejected.
Spectrum spectrum(const Eigen::MatrixXd& matrix);

/// Closed-form (lambda1, lambda2) of the equicorrelation covariance
/// sigma^2 (gamma E + (1-gamma) I): lambda1 = sigma^2((n-1)gamma + 1) along
/// the ones vector, lambda2 = sigma^2(1 - gamma) on its complement (with
/// multiplicity n-1). lambda1 > lambda2 holds for gamma > 0.
std::pair<double, double> equicorrelation_spectrum(double sigma, double gamma, int n);

/// Rotation + drift map between log-price coordinates x and principal
/// coordinates z: z(x,t) = Q^T (x + mu t), x(z,t) = Q z - mu t,
/// mu_i = r_f - sigma_i^2 / 2.
struct CoordinateMap {
    Eigen::MatrixXd q;
    Eigen::VectorXd mu;
    double horizon = 0.0;

    Eigen::VectorXd to_principal(const Eigen::VectorXd& x, double t) const;
    Eigen::VectorXd from_principal(const Eigen::VectorXd& z, double t) const;

    /// Pricing anchor z* = Q^T (log S0 + mu T).
    Eigen::VectorXd anchor(const std::vector<double>& spot) const;
};

CoordinateMap coordinate_map(const ModelSpec& spec, const Spectrum& spectrum);

}  // namespace pcx
