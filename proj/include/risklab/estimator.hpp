#pragma once

#include <Eigen/Dense>

#include "risklab/models.hpp"

namespace risklab {

// Conditional-on-X risk components.
struct ConditionalRisk {
    double var_pred = 0.0;    // Tr(X^+ Omega X^+T Sigma)
    double var_est = 0.0;     // Tr(X^+ Omega X^+T)
    double bias2_pred = 0.0;  // beta^T Q Sigma Q beta, Q the null-space projector
    double bias2_est = 0.0;   // beta^T Q beta
};

// Squared inner products between the right singular vectors of S X^+ and
// the eigenvectors of Omega; doubly stochastic.
struct AlignmentMatrix {
    Eigen::MatrixXd gamma;
};

// Ridgeless least squares: the least-norm interpolator X^+ y.
Eigen::VectorXd fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// |S X^+ T|_F^2; requires rank(x) = rows.
double var_pred_conditional(const Eigen::MatrixXd& x, const NoiseCovariance& noise,
                            const FeatureModel& features);

// |X^+ T|_F^2; the Sigma = I case of var_pred_conditional.
double var_est_conditional(const Eigen::MatrixXd& x, const NoiseCovariance& noise);

// Squared bias of the conditional mean X^+ X beta against beta, weighted by
// Sigma (prediction) or the identity (estimation). The projector onto the
// null space of x is applied exactly via the SVD.
double bias2_conditional(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                         const FeatureModel& features);
double bias2_conditional(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta);

ConditionalRisk conditional_risk(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                                 const NoiseCovariance& noise, const FeatureModel& features);

AlignmentMatrix alignment_matrix(const Eigen::MatrixXd& x, const FeatureModel& features,
                                 const NoiseCovariance& noise);

// Squared singular values of S X^+, descending. These are the nonzero
// eigenvalues of (X^T X)^+ Sigma and the weights that contract the
// alignment matrix against the spectrum of Omega.
Eigen::VectorXd weighted_pinv_spectrum(const Eigen::MatrixXd& x, const FeatureModel& features);

}  // namespace risklab
