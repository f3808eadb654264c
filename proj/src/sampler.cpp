#include "risklab/sampler.hpp"

#include <cmath>

#include <Eigen/QR>

#include "risklab/errors.hpp"

namespace risklab {

namespace {

// Deterministic fill order (row by row) so draws are reproducible.
Eigen::MatrixXd standard_normal_matrix(Eigen::Index rows, Eigen::Index cols,
                                       RandomStream& rng) {
    Eigen::MatrixXd z(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) z(i, j) = rng.normal();
    return z;
}

}  // namespace

Eigen::MatrixXd haar_orthogonal(Eigen::Index n, RandomStream& rng) {
    if (n < 1) throw InvalidParameter("haar_orthogonal: n must be >= 1");
    Eigen::MatrixXd z = standard_normal_matrix(n, n, rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd& packed = qr.matrixQR();  // R on and above the diagonal
    for (Eigen::Index j = 0; j < n; ++j)
        if (packed(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

Eigen::MatrixXd gaussian_design(Eigen::Index n, const FeatureModel& features,
                                RandomStream& rng) {
    if (n < 1) throw InvalidParameter("gaussian_design: n must be >= 1");
    Eigen::MatrixXd z = standard_normal_matrix(n, features.p(), rng);
    if (features.kind() == FeatureKind::isotropic) return z;
    return z * features.sqrt();  // row i becomes S z_i (S symmetric)
}

Eigen::VectorXd sample_noise(const NoiseCovariance& noise, RandomStream& rng) {
    Eigen::VectorXd z(noise.n());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    return noise.sqrt() * z;
}

Eigen::VectorXd sample_beta(Eigen::Index p, double r2, RandomStream& rng) {
    if (p < 1) throw InvalidParameter("sample_beta: p must be >= 1");
    if (r2 <= 0.0) throw InvalidParameter("sample_beta: r2 must be > 0");
    const double scale = std::sqrt(r2 / static_cast<double>(p));
    Eigen::VectorXd beta(p);
    for (Eigen::Index i = 0; i < p; ++i) beta(i) = scale * rng.normal();
    return beta;
}

Eigen::VectorXd sample_beta_weighted(const FeatureModel& features, double r_sigma2,
                                     RandomStream& rng) {
    if (r_sigma2 <= 0.0) throw InvalidParameter("sample_beta_weighted: r_sigma2 must be > 0");
    Eigen::VectorXd w = sample_beta(features.p(), r_sigma2, rng);
    if (features.kind() == FeatureKind::isotropic) return w;
    return features.sqrt_inverse() * w;
}

Dataset sample_dataset(const FeatureModel& features, const NoiseCovariance& noise,
                       const Eigen::VectorXd& beta, RandomStream& rng) {
    if (beta.size() != features.p())
        throw DimensionError("sample_dataset: beta length does not match features");
    Dataset d;
    d.n = noise.n();
    d.p = features.p();
    d.x = gaussian_design(d.n, features, rng);
    d.beta = beta;
    d.eps = sample_noise(noise, rng);
    d.y = d.x * beta + d.eps;
    return d;
}

}  // namespace risklab
