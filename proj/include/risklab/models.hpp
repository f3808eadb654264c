#pragma once

#include <vector>

#include <Eigen/Dense>

#include "risklab/errors.hpp"
#include "risklab/rng.hpp"

namespace risklab {

enum class NoiseKind { isotropic, ar1, clustered, explicit_matrix };

struct ClusterGroup {
    Eigen::Index size = 0;
    double sigma2 = 1.0;  // diagonal entry
    double rho = 0.0;     // off-diagonal entry within the block
};

// Error covariance Omega (n x n, SPD) together with its symmetric square
// root T. Construction verifies positive definiteness.
class NoiseCovariance {
public:
    NoiseKind kind() const { return kind_; }
    Eigen::Index n() const { return omega_.rows(); }
    const Eigen::MatrixXd& omega() const { return omega_; }
    const Eigen::MatrixXd& sqrt() const { return sqrt_; }  // T = Omega^{1/2}
    double trace() const { return trace_; }
    double trace_over_n() const { return trace_over_n_; }

    // Eigenvalues ascending with matching eigenvector columns.
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }

private:
    friend NoiseCovariance build_isotropic_noise(Eigen::Index, double);
    friend NoiseCovariance build_ar1(Eigen::Index, double, double);
    friend NoiseCovariance build_clustered(const std::vector<ClusterGroup>&);
    friend NoiseCovariance build_explicit_noise(const Eigen::MatrixXd&);

    NoiseCovariance(NoiseKind kind, Eigen::MatrixXd omega, double trace_over_n);

    NoiseKind kind_;
    Eigen::MatrixXd omega_;
    Eigen::MatrixXd sqrt_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
    double trace_ = 0.0;
    double trace_over_n_ = 0.0;
};

NoiseCovariance build_isotropic_noise(Eigen::Index n, double sigma2);

// Omega_ij = sigma2 * rho^|i-j| / (1 - rho^2); requires |rho| < 1, sigma2 > 0.
NoiseCovariance build_ar1(Eigen::Index n, double sigma2, double rho);

// Block diagonal; each group is equicorrelated with sigma_g^2 on the
// diagonal and rho_g off it. Positive definite iff
// -sigma_g^2/(n_g - 1) < rho_g < sigma_g^2 in every group.
NoiseCovariance build_clustered(const std::vector<ClusterGroup>& groups);

NoiseCovariance build_explicit_noise(const Eigen::MatrixXd& omega);

double trace_over_n(const NoiseCovariance& noise);

enum class FeatureKind { isotropic, haar_spectrum, explicit_matrix };

// Feature covariance Sigma (p x p, SPD) with symmetric square root S and
// its inverse, all derived from one eigendecomposition.
class FeatureModel {
public:
    FeatureKind kind() const { return kind_; }
    Eigen::Index p() const { return sigma_.rows(); }
    const Eigen::MatrixXd& sigma() const { return sigma_; }
    const Eigen::MatrixXd& sqrt() const { return sqrt_; }              // S
    const Eigen::MatrixXd& sqrt_inverse() const { return sqrt_inv_; }  // S^{-1}
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }  // ascending

private:
    friend FeatureModel build_isotropic_features(Eigen::Index);
    friend FeatureModel build_sigma_haar_spectrum(Eigen::Index, RandomStream&);
    friend FeatureModel build_explicit_features(const Eigen::MatrixXd&);

    FeatureModel(FeatureKind kind, Eigen::MatrixXd sigma, const Eigen::VectorXd& eigenvalues,
                 const Eigen::MatrixXd& eigenvectors);

    FeatureKind kind_;
    Eigen::MatrixXd sigma_;
    Eigen::MatrixXd sqrt_;
    Eigen::MatrixXd sqrt_inv_;
    Eigen::VectorXd eigenvalues_;
};

FeatureModel build_isotropic_features(Eigen::Index p);

// Sigma = U diag(d) U^T with U Haar orthogonal and d_i = |z_i| / sum|z_j|,
// z iid standard normal; Tr(Sigma) = 1.
FeatureModel build_sigma_haar_spectrum(Eigen::Index p, RandomStream& rng);

FeatureModel build_explicit_features(const Eigen::MatrixXd& sigma);

}  // namespace risklab
