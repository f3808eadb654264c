#include "risklab/linalg.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "risklab/numeric.hpp"

namespace risklab {

bool all_finite(const Eigen::MatrixXd& a) { return a.allFinite(); }

double asymmetry(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < j; ++i)
            worst = std::max(worst, std::abs(a(i, j) - a(j, i)));
    return worst;
}

namespace {

Eigen::Index rank_from_singular_values(const Eigen::VectorXd& s, Eigen::Index rows,
                                       Eigen::Index cols, double rank_tol) {
    if (s.size() == 0) return 0;
    const double cutoff = rank_tol * s(0) * static_cast<double>(std::max(rows, cols));
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > cutoff) ++r;
    return r;
}

}  // namespace

SvdFactors svd_thin(const Eigen::MatrixXd& a, double rank_tol) {
    if (a.rows() < 1 || a.cols() < 1) throw InvalidMatrix("svd_thin: empty matrix");
    if (!all_finite(a)) throw InvalidMatrix("svd_thin: non-finite entries");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdFactors f;
    f.u = svd.matrixU();
    f.singular_values = svd.singularValues();
    f.v = svd.matrixV();
    f.numerical_rank = rank_from_singular_values(f.singular_values, a.rows(), a.cols(), rank_tol);
    return f;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a, double rank_tol) {
    if (rank_tol < 0.0) throw InvalidParameter("pseudo_inverse: rank_tol must be >= 0");
    SvdFactors f = svd_thin(a, rank_tol);
    const Eigen::Index k = f.singular_values.size();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < f.numerical_rank; ++i) inv(i) = 1.0 / f.singular_values(i);
    return f.v * inv.asDiagonal() * f.u.transpose();
}

Eigen::VectorXd min_norm_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() != y.size())
        throw DimensionError("min_norm_solve: x has " + std::to_string(x.rows()) +
                             " rows but y has " + std::to_string(y.size()) + " entries");
    SvdFactors f = svd_thin(x);
    Eigen::VectorXd c = f.u.transpose() * y;
    for (Eigen::Index i = 0; i < c.size(); ++i)
        c(i) = i < f.numerical_rank ? c(i) / f.singular_values(i) : 0.0;
    return f.v * c;
}

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw NotSpd("spd_sqrt: matrix not square");
    if (!all_finite(m)) throw InvalidMatrix("spd_sqrt: non-finite entries");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (asymmetry(m) > 1e-10 * scale) throw NotSpd("spd_sqrt: matrix not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    if (eig.info() != Eigen::Success) throw NotSpd("spd_sqrt: eigendecomposition failed");
    const Eigen::VectorXd& w = eig.eigenvalues();
    if (w(0) <= 0.0) throw NotSpd("spd_sqrt: smallest eigenvalue " + std::to_string(w(0)) +
                                  " is not positive");
    Eigen::MatrixXd r = eig.eigenvectors() * w.cwiseSqrt().asDiagonal() *
                        eig.eigenvectors().transpose();
    return 0.5 * (r + r.transpose());
}

SpectralDistribution esd(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw NotSymmetric("esd: matrix not square");
    if (!all_finite(a)) throw InvalidMatrix("esd: non-finite entries");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if (asymmetry(a) > 1e-10 * scale) throw NotSymmetric("esd: matrix not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
    SpectralDistribution d;
    d.eigenvalues = eig.eigenvalues();  // ascending
    d.normalization = a.rows();
    return d;
}

double trace_weighted_pinv(const Eigen::MatrixXd& x, const Eigen::MatrixXd& sigma,
                           double rank_tol) {
    if (x.cols() != sigma.rows() || sigma.rows() != sigma.cols())
        throw DimensionError("trace_weighted_pinv: sigma must be p x p with p = cols(x)");
    SvdFactors f = svd_thin(x, rank_tol);
    if (f.numerical_rank < x.rows())
        throw RankDeficient("trace_weighted_pinv: rank " + std::to_string(f.numerical_rank) +
                            " < rows " + std::to_string(x.rows()));
    // Tr((X^T X)^+ Sigma) = sum_i v_i^T Sigma v_i / d_i^2 over the rank-n
    // right singular vectors.
    KahanAccumulator acc;
    for (Eigen::Index i = 0; i < f.numerical_rank; ++i) {
        const double q = f.v.col(i).dot(sigma * f.v.col(i));
        acc.add(q / (f.singular_values(i) * f.singular_values(i)));
    }
    return acc.total();
}

}  // namespace risklab
