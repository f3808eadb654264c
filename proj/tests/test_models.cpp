#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "risklab/models.hpp"
#include "risklab/numeric.hpp"

using namespace risklab;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("isotropic noise is sigma2 times the identity") {
    const NoiseCovariance noise = build_isotropic_noise(5, 2.5);
    CHECK(noise.kind() == NoiseKind::isotropic);
    CHECK(max_abs(noise.omega() - 2.5 * Eigen::MatrixXd::Identity(5, 5)) == 0.0);
    CHECK(noise.trace_over_n() == doctest::Approx(2.5));
    CHECK(max_abs(noise.sqrt() * noise.sqrt() - noise.omega()) < 1e-12);
    CHECK_THROWS_AS(build_isotropic_noise(5, 0.0), InvalidParameter);
    CHECK_THROWS_AS(build_isotropic_noise(0, 1.0), InvalidParameter);
}

TEST_CASE("ar1 noise has the stationary covariance structure") {
    const double sigma2 = 1.3, rho = 0.6;
    const NoiseCovariance noise = build_ar1(6, sigma2, rho);
    const double scale = sigma2 / (1.0 - rho * rho);
    for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index j = 0; j < 6; ++j)
            CHECK(noise.omega()(i, j) ==
                  doctest::Approx(scale * std::pow(rho, std::abs(double(i - j)))));
    // The level only depends on the diagonal, which is constant.
    CHECK(noise.trace_over_n() == doctest::Approx(scale));
    CHECK(noise.trace() == doctest::Approx(6.0 * scale));
}

TEST_CASE("ar1 noise stays positive definite across the parameter range") {
    for (double rho : {-0.95, -0.5, 0.0, 0.5, 0.95}) {
        const NoiseCovariance noise = build_ar1(8, 0.7, rho);
        CHECK(noise.eigenvalues()(0) > 0.0);
        CHECK(max_abs(noise.sqrt() * noise.sqrt() - noise.omega()) <
              1e-10 * std::max(1.0, max_abs(noise.omega())));
    }
    CHECK_THROWS_AS(build_ar1(5, 1.0, 1.0), InvalidParameter);
    CHECK_THROWS_AS(build_ar1(5, 1.0, -1.0), InvalidParameter);
    CHECK_THROWS_AS(build_ar1(5, -1.0, 0.5), InvalidParameter);
}

TEST_CASE("ar1 with rho 0 is white noise") {
    const NoiseCovariance noise = build_ar1(4, 0.9, 0.0);
    CHECK(max_abs(noise.omega() - 0.9 * Eigen::MatrixXd::Identity(4, 4)) == 0.0);
}

TEST_CASE("clustered noise is block diagonal with equicorrelated blocks") {
    const NoiseCovariance noise = build_clustered({{2, 1.5, 0.3}, {3, 0.8, -0.2}});
    REQUIRE(noise.n() == 5);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(5, 5);
    expected.block(0, 0, 2, 2).setConstant(0.3);
    expected.block(0, 0, 2, 2).diagonal().setConstant(1.5);
    expected.block(2, 2, 3, 3).setConstant(-0.2);
    expected.block(2, 2, 3, 3).diagonal().setConstant(0.8);
    CHECK(max_abs(noise.omega() - expected) == 0.0);
    CHECK(noise.trace_over_n() == doctest::Approx((2 * 1.5 + 3 * 0.8) / 5.0));
}

TEST_CASE("clustered noise enforces the positive definiteness window") {
    // rho must stay below sigma2 and above -sigma2/(size - 1).
    CHECK_THROWS_AS(build_clustered({{3, 1.0, 1.0}}), NotSpd);
    CHECK_THROWS_AS(build_clustered({{3, 1.0, -0.5}}), NotSpd);
    CHECK_NOTHROW(build_clustered({{3, 1.0, -0.49}}));
    CHECK_NOTHROW(build_clustered({{3, 1.0, 0.99}}));
    CHECK_THROWS_AS(build_clustered({{3, 0.0, 0.0}}), NotSpd);
    CHECK_THROWS_AS(build_clustered({}), InvalidParameter);
    CHECK_THROWS_AS(build_clustered({{0, 1.0, 0.0}}), InvalidParameter);
    // A single observation per group has no off-diagonal constraint.
    CHECK_NOTHROW(build_clustered({{1, 2.0, 0.0}}));
}

TEST_CASE("clustered level sets: different compositions, same trace") {
    const NoiseCovariance a = build_clustered({{10, 2.0, 0.05}, {10, 2.0, 0.05}});
    const NoiseCovariance b = build_clustered({{10, 3.5, 0.05}, {10, 0.5, 0.05}});
    CHECK(a.trace_over_n() == b.trace_over_n());  // exact in floating point
}

TEST_CASE("explicit noise accepts any spd matrix and rejects the rest") {
    Eigen::MatrixXd m(2, 2);
    m << 2.0, 0.3, 0.3, 1.0;
    const NoiseCovariance noise = build_explicit_noise(m);
    CHECK(noise.kind() == NoiseKind::explicit_matrix);
    CHECK(noise.trace_over_n() == doctest::Approx(1.5));
    Eigen::MatrixXd indefinite(2, 2);
    indefinite << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(build_explicit_noise(indefinite), NotSpd);
}

TEST_CASE("noise eigensystem is ascending and reconstructs omega") {
    const NoiseCovariance noise = build_ar1(7, 1.1, 0.4);
    const Eigen::VectorXd& w = noise.eigenvalues();
    for (Eigen::Index i = 0; i + 1 < w.size(); ++i) CHECK(w(i) <= w(i + 1));
    const Eigen::MatrixXd rebuilt =
        noise.eigenvectors() * w.asDiagonal() * noise.eigenvectors().transpose();
    CHECK(max_abs(rebuilt - noise.omega()) < 1e-12 * std::max(1.0, max_abs(noise.omega())));
}

TEST_CASE("isotropic features are the identity everywhere") {
    const FeatureModel f = build_isotropic_features(4);
    CHECK(f.kind() == FeatureKind::isotropic);
    CHECK(max_abs(f.sigma() - Eigen::MatrixXd::Identity(4, 4)) == 0.0);
    CHECK(max_abs(f.sqrt() - Eigen::MatrixXd::Identity(4, 4)) == 0.0);
    CHECK(max_abs(f.sqrt_inverse() - Eigen::MatrixXd::Identity(4, 4)) == 0.0);
}

TEST_CASE("haar spectrum features have unit trace and a genuine eigensystem") {
    RandomStream rng(201);
    const Eigen::Index p = 12;
    const FeatureModel f = build_sigma_haar_spectrum(p, rng);
    CHECK(compensated_trace(f.sigma()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.eigenvalues()(0) > 0.0);
    for (Eigen::Index i = 0; i + 1 < p; ++i)
        CHECK(f.eigenvalues()(i) <= f.eigenvalues()(i + 1));
    CHECK(max_abs(f.sqrt() * f.sqrt() - f.sigma()) < 1e-12);
    CHECK(max_abs(f.sqrt() * f.sqrt_inverse() - Eigen::MatrixXd::Identity(p, p)) < 1e-9);
    // Same stream state, same model.
    RandomStream rng2(201);
    const FeatureModel g = build_sigma_haar_spectrum(p, rng2);
    CHECK(max_abs(f.sigma() - g.sigma()) == 0.0);
}

TEST_CASE("explicit features reject indefinite input") {
    Eigen::MatrixXd indefinite(2, 2);
    indefinite << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(build_explicit_features(indefinite), NotSpd);
}
