#include <doctest.h>

#include <cmath>

#include "risklab/asymptotics.hpp"
#include "risklab/rng.hpp"

using namespace risklab;

namespace {

SpectrumMeasure two_atoms() {
    return SpectrumMeasure::from_atoms({{0.5, 0.5}, {1.5, 0.5}});
}

}  // namespace

TEST_CASE("spectrum measures recompute support and mean from the atoms") {
    const SpectrumMeasure h = SpectrumMeasure::from_atoms({{2.0, 0.25}, {0.5, 0.75}});
    CHECK(h.support_min() == doctest::Approx(0.5));
    CHECK(h.support_max() == doctest::Approx(2.0));
    CHECK(h.mean() == doctest::Approx(0.25 * 2.0 + 0.75 * 0.5));
}

TEST_CASE("spectrum measures reject bad atoms and unnormalized weights") {
    CHECK_THROWS_AS(SpectrumMeasure::from_atoms({}), InvalidParameter);
    CHECK_THROWS_AS(SpectrumMeasure::from_atoms({{-1.0, 1.0}}), InvalidParameter);
    CHECK_THROWS_AS(SpectrumMeasure::from_atoms({{1.0, -0.5}, {2.0, 1.5}}),
                    InvalidParameter);
    CHECK_THROWS_AS(SpectrumMeasure::from_atoms({{1.0, 0.5}, {2.0, 0.6}}),
                    InvalidParameter);
    CHECK_NOTHROW(SpectrumMeasure::from_atoms({{1.0, 0.5}, {2.0, 0.5}}));
}

TEST_CASE("eigenvalue lists become uniform measures") {
    Eigen::VectorXd evs(4);
    evs << 0.5, 1.0, 1.5, 2.0;
    const SpectrumMeasure h = SpectrumMeasure::from_eigenvalues(evs);
    REQUIRE(h.atoms().size() == 4);
    for (double w : h.weights()) CHECK(w == doctest::Approx(0.25));
    CHECK(h.mean() == doctest::Approx(1.25));

    RandomStream rng(601);
    const FeatureModel features = build_sigma_haar_spectrum(6, rng);
    const SpectrumMeasure hf = SpectrumMeasure::from_features(features);
    CHECK(hf.mean() == doctest::Approx(1.0 / 6.0).epsilon(1e-10));
}

TEST_CASE("stieltjes_rhs is the expected resolvent average") {
    const SpectrumMeasure point = SpectrumMeasure::from_atoms({{2.0, 1.0}});
    CHECK(stieltjes_rhs(point, 0.5) == doctest::Approx(1.0 / (1.0 + 2.0 * 0.5)));
    const SpectrumMeasure h = two_atoms();
    CHECK(stieltjes_rhs(h, 1.0) == doctest::Approx(0.5 / 1.5 + 0.5 / 2.5));
    // Strictly decreasing in s.
    double prev = 1.0;
    for (double s : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        const double v = stieltjes_rhs(h, s);
        CHECK(v < prev);
        prev = v;
    }
    CHECK_THROWS_AS(stieltjes_rhs(h, 0.0), InvalidParameter);
    CHECK_THROWS_AS(stieltjes_rhs(h, -1.0), InvalidParameter);
}

TEST_CASE("isotropic spectra give the closed-form fixed point") {
    const SpectrumMeasure unit = SpectrumMeasure::from_atoms({{1.0, 1.0}});
    CHECK(std::abs(solve_s_star(unit, 2.0) - 1.0) < 1e-10);
    CHECK(std::abs(solve_s_star(unit, 3.0) - 0.5) < 1e-10);
    CHECK(std::abs(solve_s_star(unit, 1.25) - 4.0) < 1e-9);
    // A point mass at tau rescales the root by 1/tau.
    const SpectrumMeasure at_tau = SpectrumMeasure::from_atoms({{4.0, 1.0}});
    CHECK(std::abs(solve_s_star(at_tau, 2.0) - 0.25) < 1e-10);
}

TEST_CASE("the two-atom fixed point hits its algebraic root") {
    // For atoms {0.5, 1.5} with equal weight at gamma = 2, clearing the
    // denominators reduces the fixed point condition to 0.75 s^2 = 1, so
    // the root is 2 / sqrt(3).
    const double root = 2.0 / std::sqrt(3.0);
    const SpectrumMeasure h = two_atoms();
    const double s = solve_s_star(h, 2.0);
    CHECK(std::abs(s - root) < 1e-9);
    CHECK(std::abs(stieltjes_rhs(h, s) - 0.5) < 1e-12);
}

TEST_CASE("fixed points respect their bracket and shrink with gamma") {
    RandomStream rng(602);
    for (int t = 0; t < 30; ++t) {
        const std::size_t k = 2 + static_cast<std::size_t>(rng.next_u64() % 6);
        std::vector<std::pair<double, double>> atoms(k);
        double total = 0.0;
        for (auto& a : atoms) {
            a.first = 0.2 + 2.8 * rng.uniform();
            a.second = 0.1 + rng.uniform();
            total += a.second;
        }
        for (auto& a : atoms) a.second /= total;
        const SpectrumMeasure h = SpectrumMeasure::from_atoms(atoms);
        const double gamma = 1.1 + 20.0 * rng.uniform();
        const SStarBounds b = s_star_bounds(h, gamma);
        const double s = solve_s_star(h, gamma);
        CHECK(b.lower <= b.tight_lower);
        CHECK(b.tight_lower <= s * (1.0 + 1e-9));
        CHECK(s <= b.upper * (1.0 + 1e-9));
        CHECK(solve_s_star(h, gamma + 0.5) < s);
    }
}

TEST_CASE("tight lower bound touches the root exactly for point masses") {
    const SpectrumMeasure point = SpectrumMeasure::from_atoms({{2.5, 1.0}});
    const SStarBounds b = s_star_bounds(point, 4.0);
    CHECK(b.lower == doctest::Approx(b.upper));
    CHECK(b.tight_lower == doctest::Approx(solve_s_star(point, 4.0)).epsilon(1e-10));
}

TEST_CASE("limit risk combines the bias plateau and the variance term") {
    const SpectrumMeasure unit = SpectrumMeasure::from_atoms({{1.0, 1.0}});
    const AsymptoticResult res = limit_estimation_risk(1.0, 1.0, 2.0, unit);
    CHECK(res.gamma == 2.0);
    CHECK(res.r2 == 1.0);
    CHECK(res.kappa2 == 1.0);
    CHECK(std::abs(res.s_star - 1.0) < 1e-10);
    CHECK(res.limit_risk == doctest::Approx(0.5 + 1.0).epsilon(1e-10));

    // Doubling the noise level moves only the variance share.
    const AsymptoticResult louder = limit_estimation_risk(1.0, 2.0, 2.0, unit);
    CHECK(louder.limit_risk == doctest::Approx(0.5 + 2.0).epsilon(1e-10));
}

TEST_CASE("the underparameterized regime is rejected") {
    const SpectrumMeasure unit = SpectrumMeasure::from_atoms({{1.0, 1.0}});
    CHECK_THROWS_AS(s_star_bounds(unit, 1.0), InvalidRegime);
    CHECK_THROWS_AS(solve_s_star(unit, 0.8), InvalidRegime);
    CHECK_THROWS_AS(limit_estimation_risk(1.0, 1.0, 1.0, unit), InvalidRegime);
}
