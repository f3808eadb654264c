#include "risklab/estimator.hpp"

#include <string>

#include "risklab/errors.hpp"
#include "risklab/linalg.hpp"
#include "risklab/numeric.hpp"

namespace risklab {

namespace {

SvdFactors full_row_rank_svd(const Eigen::MatrixXd& x, const char* what) {
    SvdFactors f = svd_thin(x);
    if (f.numerical_rank < x.rows())
        throw RankDeficient(std::string(what) + ": rank " + std::to_string(f.numerical_rank) +
                            " < rows " + std::to_string(x.rows()));
    return f;
}

Eigen::MatrixXd pinv_from_factors(const SvdFactors& f) {
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(f.singular_values.size());
    for (Eigen::Index i = 0; i < f.numerical_rank; ++i) inv(i) = 1.0 / f.singular_values(i);
    return f.v * inv.asDiagonal() * f.u.transpose();
}

// Component of beta orthogonal to the row space of x.
Eigen::VectorXd null_space_component(const SvdFactors& f, const Eigen::VectorXd& beta) {
    const auto vr = f.v.leftCols(f.numerical_rank);
    return beta - vr * (vr.transpose() * beta);
}

}  // namespace

Eigen::VectorXd fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    return min_norm_solve(x, y);
}

double var_pred_conditional(const Eigen::MatrixXd& x, const NoiseCovariance& noise,
                            const FeatureModel& features) {
    if (x.rows() != noise.n())
        throw DimensionError("var_pred_conditional: noise dimension does not match rows");
    if (x.cols() != features.p())
        throw DimensionError("var_pred_conditional: feature dimension does not match cols");
    SvdFactors f = full_row_rank_svd(x, "var_pred_conditional");
    Eigen::MatrixXd b = features.sqrt() * pinv_from_factors(f);
    return frobenius_sq(b * noise.sqrt());
}

double var_est_conditional(const Eigen::MatrixXd& x, const NoiseCovariance& noise) {
    if (x.rows() != noise.n())
        throw DimensionError("var_est_conditional: noise dimension does not match rows");
    SvdFactors f = full_row_rank_svd(x, "var_est_conditional");
    return frobenius_sq(pinv_from_factors(f) * noise.sqrt());
}

double bias2_conditional(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                         const FeatureModel& features) {
    if (x.cols() != beta.size())
        throw DimensionError("bias2_conditional: beta length does not match cols");
    if (x.cols() != features.p())
        throw DimensionError("bias2_conditional: feature dimension does not match cols");
    Eigen::VectorXd resid = null_space_component(svd_thin(x), beta);
    Eigen::VectorXd weighted = features.sqrt() * resid;
    KahanAccumulator acc;
    for (Eigen::Index i = 0; i < weighted.size(); ++i) acc.add(weighted(i) * weighted(i));
    return acc.total();
}

double bias2_conditional(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta) {
    if (x.cols() != beta.size())
        throw DimensionError("bias2_conditional: beta length does not match cols");
    Eigen::VectorXd resid = null_space_component(svd_thin(x), beta);
    KahanAccumulator acc;
    for (Eigen::Index i = 0; i < resid.size(); ++i) acc.add(resid(i) * resid(i));
    return acc.total();
}

ConditionalRisk conditional_risk(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                                 const NoiseCovariance& noise, const FeatureModel& features) {
    ConditionalRisk r;
    r.var_pred = var_pred_conditional(x, noise, features);
    r.var_est = var_est_conditional(x, noise);
    r.bias2_pred = bias2_conditional(x, beta, features);
    r.bias2_est = bias2_conditional(x, beta);
    return r;
}

AlignmentMatrix alignment_matrix(const Eigen::MatrixXd& x, const FeatureModel& features,
                                 const NoiseCovariance& noise) {
    if (x.rows() != noise.n())
        throw DimensionError("alignment_matrix: noise dimension does not match rows");
    if (x.cols() != features.p())
        throw DimensionError("alignment_matrix: feature dimension does not match cols");
    SvdFactors fx = full_row_rank_svd(x, "alignment_matrix");
    Eigen::MatrixXd b = features.sqrt() * pinv_from_factors(fx);
    SvdFactors fb = svd_thin(b);  // right singular vectors, descending order
    const Eigen::Index n = x.rows();

    // Eigenvectors of Omega ordered by descending eigenvalue.
    Eigen::MatrixXd u_t(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        u_t.col(j) = noise.eigenvectors().col(n - 1 - j);

    Eigen::MatrixXd inner = fb.v.transpose() * u_t;
    AlignmentMatrix g;
    g.gamma = inner.cwiseProduct(inner);
    return g;
}

Eigen::VectorXd weighted_pinv_spectrum(const Eigen::MatrixXd& x, const FeatureModel& features) {
    SvdFactors fx = full_row_rank_svd(x, "weighted_pinv_spectrum");
    Eigen::MatrixXd b = features.sqrt() * pinv_from_factors(fx);
    Eigen::VectorXd s = svd_thin(b).singular_values;
    return s.cwiseProduct(s);
}

}  // namespace risklab
