#pragma once

#include <Eigen/Dense>

#include "risklab/errors.hpp"

namespace risklab {

// Singular values below rank_tol * sigma_max * max(rows, cols) are treated
// as zero everywhere a numerical rank is needed.
inline constexpr double kDefaultRankTol = 1e-12;

struct SvdFactors {
    Eigen::MatrixXd u;                 // orthonormal columns
    Eigen::VectorXd singular_values;   // descending, >= 0
    Eigen::MatrixXd v;                 // orthonormal columns
    Eigen::Index numerical_rank = 0;
};

// Eigenvalues of a symmetric matrix, sorted ascending, with the CDF
// F(s) = (1/normalization) * #{ i : lambda_i <= s }.
struct SpectralDistribution {
    Eigen::VectorXd eigenvalues;
    Eigen::Index normalization = 0;

    double cdf(double s) const {
        Eigen::Index count = 0;
        for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
            if (eigenvalues(i) <= s) ++count;
        return static_cast<double>(count) / static_cast<double>(normalization);
    }
};

// Thin SVD a = u * diag(s) * v^T with numerical rank attached.
SvdFactors svd_thin(const Eigen::MatrixXd& a, double rank_tol = kDefaultRankTol);

// Moore-Penrose pseudoinverse via thin SVD with the rank rule above.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a, double rank_tol = kDefaultRankTol);

// Least-norm solution of x * b = y (the ridgeless interpolator when
// rank(x) = rows).
Eigen::VectorXd min_norm_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// Symmetric square root of a symmetric positive definite matrix.
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m);

// Empirical spectral distribution of a symmetric matrix.
SpectralDistribution esd(const Eigen::MatrixXd& a);

// Tr((x^T x)^+ sigma) for a full-row-rank x; throws RankDeficient otherwise.
double trace_weighted_pinv(const Eigen::MatrixXd& x, const Eigen::MatrixXd& sigma,
                           double rank_tol = kDefaultRankTol);

bool all_finite(const Eigen::MatrixXd& a);

// Max |a - a^T| entry, for symmetry checks.
double asymmetry(const Eigen::MatrixXd& a);

}  // namespace risklab
