#include "pcx/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace pcx {

ModelSpec ModelSpec::equicorrelated(int n, double sigma, double gamma, double spot,
                                    double strike, std::vector<double> weights,
                                    double horizon) {
    ModelSpec spec;
    spec.n_assets = n;
    spec.sigma.assign(n, sigma);
    spec.correlation = Eigen::MatrixXd::Constant(n, n, gamma);
    spec.correlation.diagonal().setOnes();
    spec.horizon = horizon;
    spec.spot.assign(n, spot);
    spec.strike = strike;
    spec.weights = std::move(weights);
    spec.validate();
    return spec;
}

void ModelSpec::validate() const {
    if (n_assets <= 0) throw validation_error("model: n_assets must be positive");
    if (static_cast<int>(sigma.size()) != n_assets)
        throw validation_error("model: sigma length must equal n_assets");
    for (double s : sigma)
        if (!(s > 0.0)) throw validation_error("model: volatilities must be > 0");
    if (correlation.rows() != n_assets || correlation.cols() != n_assets)
        throw validation_error("model: correlation must be n_assets x n_assets");
    if (!correlation.isApprox(correlation.transpose(), 1e-12))
        throw validation_error("model: correlation must be symmetric");
    for (int i = 0; i < n_assets; ++i)
        if (std::abs(correlation(i, i) - 1.0) > 1e-12)
            throw validation_error("model: correlation diagonal must be 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(correlation, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw validation_error("model: correlation matrix is not positive semidefinite");
    if (!(horizon > 0.0)) throw validation_error("model: horizon must be > 0");
    if (static_cast<int>(spot.size()) != n_assets)
        throw validation_error("model: spot length must equal n_assets");
    for (double s : spot)
        if (!(s > 0.0)) throw validation_error("model: spot prices must be > 0");
    if (strike < 0.0) throw validation_error("model: strike must be >= 0");
    if (static_cast<int>(weights.size()) != n_assets)
        throw validation_error("model: weights length must equal n_assets");
}

Eigen::MatrixXd build_covariance(const ModelSpec& spec) {
    spec.validate();
    const int n = spec.n_assets;
    Eigen::MatrixXd cov(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            cov(i, j) = spec.sigma[i] * spec.sigma[j] * spec.correlation(i, j);
    return cov;
}

Spectrum spectrum(const Eigen::MatrixXd& matrix) {
    const int n = static_cast<int>(matrix.rows());
    if (matrix.cols() != n) throw validation_error("spectrum: matrix must be square");
    if (!matrix.isApprox(matrix.transpose(), 1e-10))
        throw validation_error("spectrum: matrix must be symmetric");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix);
    if (es.info() != Eigen::Success) throw numerical_error("spectrum: eigensolver failed");

    Spectrum out;
    out.q.resize(n, n);
    out.lambdas.resize(n);
    // Eigen returns ascending order; reverse to descending.
    for (int i = 0; i < n; ++i) {
        double lam = es.eigenvalues()(n - 1 - i);
        if (lam < 0.0) {
            if (lam < -1e-12)
                throw validation_error("spectrum: matrix has a negative eigenvalue");
            lam = 0.0;
        }
        out.lambdas(i) = lam;
        Eigen::VectorXd v = es.eigenvectors().col(n - 1 - i);
        int imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v(imax) < 0.0) v = -v;  // sign fixed for reproducible output
        out.q.col(i) = v;
    }
    return out;
}

std::pair<double, double> equicorrelation_spectrum(double sigma, double gamma, int n) {
    if (n <= 0) throw validation_error("equicorrelation_spectrum: n must be positive");
    if (!(sigma > 0.0)) throw validation_error("equicorrelation_spectrum: sigma must be > 0");
    if (!(std::abs(gamma) < 1.0))
        throw validation_error("equicorrelation_spectrum: |gamma| must be < 1");
    const double s2 = sigma * sigma;
    return {s2 * ((n - 1) * gamma + 1.0), s2 * (1.0 - gamma)};
}

Eigen::VectorXd CoordinateMap::to_principal(const Eigen::VectorXd& x, double t) const {
    return q.transpose() * (x + mu * t);
}

Eigen::VectorXd CoordinateMap::from_principal(const Eigen::VectorXd& z, double t) const {
    return q * z - mu * t;
}

Eigen::VectorXd CoordinateMap::anchor(const std::vector<double>& spot) const {
    Eigen::VectorXd logs(static_cast<Eigen::Index>(spot.size()));
    for (Eigen::Index i = 0; i < logs.size(); ++i) logs(i) = std::log(spot[i]);
    return to_principal(logs, horizon);
}

CoordinateMap coordinate_map(const ModelSpec& spec, const Spectrum& spectrum) {
    if (spectrum.size() != spec.n_assets)
        throw validation_error("coordinate_map: spectrum dimension mismatch");
    CoordinateMap map;
    map.q = spectrum.q;
    map.mu.resize(spec.n_assets);
    for (int i = 0; i < spec.n_assets; ++i)
        map.mu(i) = spec.risk_free - 0.5 * spec.sigma[i] * spec.sigma[i];
    map.horizon = spec.horizon;
    return map;
}

}  // namespace pcx
