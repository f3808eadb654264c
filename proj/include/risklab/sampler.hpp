#pragma once

#include <functional>

#include <Eigen/Dense>

#include "risklab/models.hpp"
#include "risklab/rng.hpp"

namespace risklab {

// One simulation draw with y = x * beta + eps by construction.
struct Dataset {
    Eigen::MatrixXd x;
    Eigen::VectorXd beta;
    Eigen::VectorXd eps;
    Eigen::VectorXd y;
    Eigen::Index n = 0;
    Eigen::Index p = 0;
};

// Haar-distributed orthogonal matrix: QR of an iid Gaussian matrix with the
// R-diagonal sign correction. Plain QR without the correction is not Haar.
Eigen::MatrixXd haar_orthogonal(Eigen::Index n, RandomStream& rng);

// Rows iid N(0, Sigma) via x_i = S z_i with z_i standard normal; the result
// is left-spherical by construction.
Eigen::MatrixXd gaussian_design(Eigen::Index n, const FeatureModel& features,
                                RandomStream& rng);

// eps = T z with z standard normal, so E[eps] = 0 and Cov(eps) = Omega.
Eigen::VectorXd sample_noise(const NoiseCovariance& noise, RandomStream& rng);

// beta ~ N(0, (r2/p) I); E[|beta|^2] = r2. Requires r2 > 0.
Eigen::VectorXd sample_beta(Eigen::Index p, double r2, RandomStream& rng);

// beta = S^{-1} w with w ~ N(0, (r_sigma2/p) I), so E[S beta (S beta)^T] =
// (r_sigma2/p) I. Requires r_sigma2 > 0.
Eigen::VectorXd sample_beta_weighted(const FeatureModel& features, double r_sigma2,
                                     RandomStream& rng);

Dataset sample_dataset(const FeatureModel& features, const NoiseCovariance& noise,
                       const Eigen::VectorXd& beta, RandomStream& rng);

// Hook for swapping in an alternative left-spherical design sampler; the
// default is gaussian_design.
using DesignSampler =
    std::function<Eigen::MatrixXd(Eigen::Index, const FeatureModel&, RandomStream&)>;

}  // namespace risklab
