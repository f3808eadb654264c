#include "risklab/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "risklab/linalg.hpp"
#include "risklab/numeric.hpp"
#include "risklab/sampler.hpp"

namespace risklab {

namespace {

struct EigPair {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;
};

EigPair eigensolve_spd(const Eigen::MatrixXd& m, const char* what) {
    if (m.rows() != m.cols()) throw NotSpd(std::string(what) + ": matrix not square");
    if (!all_finite(m)) throw InvalidMatrix(std::string(what) + ": non-finite entries");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (asymmetry(m) > 1e-10 * scale)
        throw NotSpd(std::string(what) + ": matrix not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    if (eig.info() != Eigen::Success)
        throw NotSpd(std::string(what) + ": eigendecomposition failed");
    const Eigen::VectorXd& w = eig.eigenvalues();
    if (w(w.size() - 1) <= 0.0 || w(0) <= 1e-12 * w(w.size() - 1))
        throw NotSpd(std::string(what) + ": smallest eigenvalue " +
                     std::to_string(w(0)) + " fails the positive definiteness check");
    return {w, eig.eigenvectors()};
}

Eigen::MatrixXd symmetric_product(const Eigen::MatrixXd& q, const Eigen::VectorXd& d) {
    Eigen::MatrixXd m = q * d.asDiagonal() * q.transpose();
    return 0.5 * (m + m.transpose());
}

}  // namespace

NoiseCovariance::NoiseCovariance(NoiseKind kind, Eigen::MatrixXd omega, double trace_over_n)
    : kind_(kind), omega_(std::move(omega)), trace_over_n_(trace_over_n) {
    EigPair eig = eigensolve_spd(omega_, "NoiseCovariance");
    eigenvalues_ = eig.values;
    eigenvectors_ = eig.vectors;
    sqrt_ = symmetric_product(eigenvectors_, eigenvalues_.cwiseSqrt());
    trace_ = compensated_trace(omega_);
}

NoiseCovariance build_isotropic_noise(Eigen::Index n, double sigma2) {
    if (n < 1) throw InvalidParameter("build_isotropic_noise: n must be >= 1");
    if (sigma2 <= 0.0) throw InvalidParameter("build_isotropic_noise: sigma2 must be > 0");
    Eigen::MatrixXd omega = sigma2 * Eigen::MatrixXd::Identity(n, n);
    return NoiseCovariance(NoiseKind::isotropic, std::move(omega), sigma2);
}

NoiseCovariance build_ar1(Eigen::Index n, double sigma2, double rho) {
    if (n < 1) throw InvalidParameter("build_ar1: n must be >= 1");
    if (sigma2 <= 0.0) throw InvalidParameter("build_ar1: sigma2 must be > 0");
    if (std::abs(rho) >= 1.0) throw InvalidParameter("build_ar1: |rho| must be < 1");
    const double level = sigma2 / (1.0 - rho * rho);
    std::vector<double> pow_rho(static_cast<std::size_t>(n), 1.0);
    for (Eigen::Index k = 1; k < n; ++k) pow_rho[k] = pow_rho[k - 1] * rho;
    Eigen::MatrixXd omega(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            omega(i, j) = level * pow_rho[static_cast<std::size_t>(std::abs(i - j))];
    return NoiseCovariance(NoiseKind::ar1, std::move(omega), level);
}

NoiseCovariance build_clustered(const std::vector<ClusterGroup>& groups) {
    if (groups.empty()) throw InvalidParameter("build_clustered: no groups");
    Eigen::Index n = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const ClusterGroup& grp = groups[g];
        if (grp.size < 1)
            throw InvalidParameter("build_clustered: group " + std::to_string(g) +
                                   " has non-positive size");
        if (grp.sigma2 <= 0.0)
            throw NotSpd("build_clustered: group " + std::to_string(g) +
                         " has non-positive diagonal sigma2");
        if (grp.size >= 2) {
            const double lo = -grp.sigma2 / static_cast<double>(grp.size - 1);
            if (grp.rho <= lo || grp.rho >= grp.sigma2)
                throw NotSpd("build_clustered: group " + std::to_string(g) +
                             " violates positive definiteness (rho=" + std::to_string(grp.rho) +
                             " outside (" + std::to_string(lo) + ", " +
                             std::to_string(grp.sigma2) + "))");
        }
        n += grp.size;
    }
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(n, n);
    Eigen::Index offset = 0;
    KahanAccumulator tr;
    for (const ClusterGroup& grp : groups) {
        for (Eigen::Index i = 0; i < grp.size; ++i)
            for (Eigen::Index j = 0; j < grp.size; ++j)
                omega(offset + i, offset + j) = i == j ? grp.sigma2 : grp.rho;
        tr.add(static_cast<double>(grp.size) * grp.sigma2);
        offset += grp.size;
    }
    return NoiseCovariance(NoiseKind::clustered, std::move(omega),
                           tr.total() / static_cast<double>(n));
}

NoiseCovariance build_explicit_noise(const Eigen::MatrixXd& omega) {
    Eigen::MatrixXd m = omega;
    const double tr_over_n = compensated_trace(m) / static_cast<double>(m.rows());
    return NoiseCovariance(NoiseKind::explicit_matrix, std::move(m), tr_over_n);
}

double trace_over_n(const NoiseCovariance& noise) { return noise.trace_over_n(); }

FeatureModel::FeatureModel(FeatureKind kind, Eigen::MatrixXd sigma,
                           const Eigen::VectorXd& eigenvalues,
                           const Eigen::MatrixXd& eigenvectors)
    : kind_(kind), sigma_(std::move(sigma)), eigenvalues_(eigenvalues) {
    if (eigenvalues_(0) <= 0.0)
        throw NotSpd("FeatureModel: smallest eigenvalue " + std::to_string(eigenvalues_(0)) +
                     " is not positive");
    sqrt_ = symmetric_product(eigenvectors, eigenvalues_.cwiseSqrt());
    sqrt_inv_ = symmetric_product(eigenvectors, eigenvalues_.cwiseSqrt().cwiseInverse());
}

FeatureModel build_isotropic_features(Eigen::Index p) {
    if (p < 1) throw InvalidParameter("build_isotropic_features: p must be >= 1");
    return FeatureModel(FeatureKind::isotropic, Eigen::MatrixXd::Identity(p, p),
                        Eigen::VectorXd::Ones(p), Eigen::MatrixXd::Identity(p, p));
}

FeatureModel build_sigma_haar_spectrum(Eigen::Index p, RandomStream& rng) {
    if (p < 1) throw InvalidParameter("build_sigma_haar_spectrum: p must be >= 1");
    Eigen::VectorXd d(p);
    while (true) {
        for (Eigen::Index i = 0; i < p; ++i) d(i) = std::abs(rng.normal());
        if (d.minCoeff() >= 1e-300) break;
    }
    KahanAccumulator sum;
    for (Eigen::Index i = 0; i < p; ++i) sum.add(d(i));
    d /= sum.total();
    Eigen::MatrixXd u = haar_orthogonal(p, rng);

    // Store the spectrum ascending with matching eigenvector columns.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return d(a) < d(b); });
    Eigen::VectorXd d_sorted(p);
    Eigen::MatrixXd u_sorted(p, p);
    for (Eigen::Index k = 0; k < p; ++k) {
        d_sorted(k) = d(order[static_cast<std::size_t>(k)]);
        u_sorted.col(k) = u.col(order[static_cast<std::size_t>(k)]);
    }
    Eigen::MatrixXd sigma = symmetric_product(u_sorted, d_sorted);
    return FeatureModel(FeatureKind::haar_spectrum, std::move(sigma), d_sorted, u_sorted);
}

FeatureModel build_explicit_features(const Eigen::MatrixXd& sigma) {
    Eigen::MatrixXd m = sigma;
    EigPair eig = eigensolve_spd(m, "build_explicit_features");
    return FeatureModel(FeatureKind::explicit_matrix, std::move(m), eig.values, eig.vectors);
}

}  // namespace risklab
