#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "risklab/asymptotics.hpp"
#include "risklab/errors.hpp"
#include "risklab/estimator.hpp"
#include "risklab/experiments.hpp"
#include "risklab/linalg.hpp"
#include "risklab/numeric.hpp"
#include "risklab/sampler.hpp"
#include "risklab/version.hpp"

namespace risklab {

namespace {

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, RandomStream& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

Eigen::MatrixXd random_spd(Eigen::Index k, RandomStream& rng) {
    Eigen::MatrixXd g = gaussian_matrix(k, k, rng);
    Eigen::MatrixXd m = g * g.transpose() / static_cast<double>(k);
    m += 0.1 * Eigen::MatrixXd::Identity(k, k);
    return 0.5 * (m + m.transpose());
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

VerifyCheck make_check(std::string name, double observed, double expected, double tolerance) {
    VerifyCheck c;
    c.name = std::move(name);
    c.observed = observed;
    c.expected = expected;
    c.tolerance = tolerance;
    c.pass = std::abs(observed - expected) <= tolerance;
    return c;
}

VerifyCheck check_penrose(RandomStream rng) {
    double worst = 0.0;
    for (int t = 0; t < 60; ++t) {
        const Eigen::Index rows = 1 + static_cast<Eigen::Index>(rng.next_u64() % 8);
        const Eigen::Index cols = 1 + static_cast<Eigen::Index>(rng.next_u64() % 8);
        Eigen::MatrixXd a;
        if (t % 3 == 2) {
            const Eigen::Index inner =
                1 + static_cast<Eigen::Index>(rng.next_u64() %
                                              static_cast<std::uint64_t>(std::min(rows, cols)));
            a = gaussian_matrix(rows, inner, rng) * gaussian_matrix(inner, cols, rng);
        } else {
            a = gaussian_matrix(rows, cols, rng);
        }
        const Eigen::MatrixXd pi = pseudo_inverse(a);
        const Eigen::MatrixXd api = a * pi;
        const Eigen::MatrixXd pia = pi * a;
        worst = std::max(worst, max_abs(api * a - a) / std::max(1.0, max_abs(a)));
        worst = std::max(worst, max_abs(pia * pi - pi) / std::max(1.0, max_abs(pi)));
        worst = std::max(worst, asymmetry(api) / std::max(1.0, max_abs(api)));
        worst = std::max(worst, asymmetry(pia) / std::max(1.0, max_abs(pia)));
    }
    return make_check("penrose_pseudoinverse", worst, 0.0, 1e-8);
}

VerifyCheck check_min_norm(RandomStream rng) {
    double worst = 0.0;
    for (int t = 0; t < 40; ++t) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.next_u64() % 6);
        const Eigen::Index p = n + static_cast<Eigen::Index>(rng.next_u64() % 7);
        const Eigen::MatrixXd x = gaussian_matrix(n, p, rng);
        const Eigen::VectorXd y = gaussian_matrix(n, 1, rng);
        const Eigen::VectorXd b = min_norm_solve(x, y);
        worst = std::max(worst, (x * b - y).cwiseAbs().maxCoeff() /
                                    std::max(1.0, y.cwiseAbs().maxCoeff()));
        const SvdFactors f = svd_thin(x);
        const Eigen::MatrixXd vr = f.v.leftCols(f.numerical_rank);
        const Eigen::VectorXd out_of_row_space = b - vr * (vr.transpose() * b);
        worst = std::max(worst, out_of_row_space.cwiseAbs().maxCoeff() /
                                    std::max(1.0, b.cwiseAbs().maxCoeff()));
    }
    return make_check("min_norm_interpolation", worst, 0.0, 1e-8);
}

VerifyCheck check_doubly_stochastic(RandomStream rng) {
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.next_u64() % 5);
        const Eigen::Index p = n + static_cast<Eigen::Index>(rng.next_u64() % 7);
        const FeatureModel features = build_explicit_features(random_spd(p, rng));
        const NoiseCovariance noise = build_explicit_noise(random_spd(n, rng));
        const Eigen::MatrixXd x = gaussian_design(n, features, rng);
        const Eigen::MatrixXd g = alignment_matrix(x, features, noise).gamma;
        worst = std::max(worst, (g.rowwise().sum().array() - 1.0).abs().maxCoeff());
        worst = std::max(worst, (g.colwise().sum().array() - 1.0).abs().maxCoeff());
    }
    return make_check("gamma_doubly_stochastic", worst, 0.0, 1e-8);
}

// Averaging the alignment matrix over Haar rotations of one fixed design
// must flatten it to the constant matrix 1/n. The injected fault freezes
// the rotations at the identity, which leaves the average at the raw
// single-design alignment and trips the tolerance.
VerifyCheck check_haar_average(RandomStream rng, bool frozen_rotation) {
    const Eigen::Index n = 6;
    const Eigen::Index p = 12;
    const int n_rot = 2000;
    const FeatureModel features = build_sigma_haar_spectrum(p, rng);
    const NoiseCovariance noise = build_ar1(n, 1.0, 0.6);
    const Eigen::MatrixXd x0 = gaussian_design(n, features, rng);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    for (int t = 0; t < n_rot; ++t) {
        const Eigen::MatrixXd rot = frozen_rotation
                                        ? Eigen::MatrixXd::Identity(n, n)
                                        : haar_orthogonal(n, rng);
        acc += alignment_matrix(rot * x0, features, noise).gamma;
    }
    const Eigen::MatrixXd mean = acc / static_cast<double>(n_rot);
    const double flat = 1.0 / static_cast<double>(n);
    const double worst = (mean.array() - flat).abs().maxCoeff();
    return make_check("gamma_haar_average", worst, 0.0, 5.0 / std::sqrt(double(n_rot)));
}

VerifyCheck check_trace_only(RandomStream rng, std::uint64_t seed) {
    const Eigen::Index n = 8;
    const Eigen::Index p = 16;
    const FeatureModel features = build_sigma_haar_spectrum(p, rng);
    McConfig mc;
    mc.n_x = 16;
    mc.seed = seed;
    BatchOptions opt;
    opt.store_grams = false;
    const DesignBatch batch = make_design_batch(features, n, mc, opt);
    // Same noise level sigma2 / (1 - rho^2) = 1 on both sides, so the
    // theory column must agree bit for bit.
    const NoiseCovariance white = build_ar1(n, 1.0, 0.0);
    const NoiseCovariance correlated = build_ar1(n, 0.75, 0.5);
    double worst = 0.0;
    for (RiskTarget target : {RiskTarget::prediction, RiskTarget::estimation}) {
        const double a = theory_variance_from_batch(batch, white, target);
        const double b = theory_variance_from_batch(batch, correlated, target);
        worst = std::max(worst, std::abs(a - b));
    }
    return make_check("trace_only_dependence", worst, 0.0, 0.0);
}

VerifyCheck check_bias_rank_deficiency(RandomStream rng, std::uint64_t seed) {
    const Eigen::Index n = 20;
    const Eigen::Index p = 40;
    const FeatureModel features = build_sigma_haar_spectrum(p, rng);
    McConfig mc;
    mc.n_x = 16;
    mc.n_beta = 625;
    mc.seed = seed;
    const Estimate est = mc_expected_bias2(features, n, p, 1.0, mc, RiskTarget::estimation);
    VerifyCheck c = make_check("bias_rank_deficiency", est.value,
                               theory_bias2(1.0, n, p), 3.0 * est.std_error);
    return c;
}

VerifyCheck check_stieltjes_isotropic() {
    const SpectrumMeasure h = SpectrumMeasure::from_atoms({{1.0, 1.0}});
    const double s = solve_s_star(h, 2.0);
    return make_check("stieltjes_isotropic", s, 1.0, 1e-10);
}

SpectrumMeasure random_measure(RandomStream& rng) {
    const std::size_t k = 2 + static_cast<std::size_t>(rng.next_u64() % 9);
    std::vector<double> raw(k);
    KahanAccumulator total;
    for (std::size_t i = 0; i < k; ++i) {
        raw[i] = 0.05 + rng.uniform();
        total.add(raw[i]);
    }
    std::vector<std::pair<double, double>> atoms(k);
    for (std::size_t i = 0; i < k; ++i)
        atoms[i] = {0.1 + 2.9 * rng.uniform(), raw[i] / total.total()};
    return SpectrumMeasure::from_atoms(atoms);
}

VerifyCheck check_stieltjes_residual(RandomStream rng) {
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const SpectrumMeasure h = random_measure(rng);
        const double gamma = 1.05 + 98.95 * rng.uniform();
        const double s = solve_s_star(h, gamma);
        worst = std::max(worst, std::abs(stieltjes_rhs(h, s) - (1.0 - 1.0 / gamma)));
    }
    return make_check("stieltjes_residual", worst, 0.0, 1e-10);
}

VerifyCheck check_bound_ordering(RandomStream rng) {
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const SpectrumMeasure h = random_measure(rng);
        const double gamma = 1.05 + 98.95 * rng.uniform();
        const SStarBounds b = s_star_bounds(h, gamma);
        const double s = solve_s_star(h, gamma);
        const double violation =
            std::max({b.lower - b.tight_lower, b.tight_lower - s, s - b.upper});
        worst = std::max(worst, std::max(0.0, violation / std::max(1.0, b.upper)));
    }
    return make_check("bound_ordering", worst, 0.0, 1e-9);
}

VerifyCheck check_reconstruction(RandomStream rng) {
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.next_u64() % 4);
        const Eigen::Index p = n + static_cast<Eigen::Index>(rng.next_u64() % 8);
        const FeatureModel features = build_explicit_features(random_spd(p, rng));
        const NoiseCovariance noise = build_explicit_noise(random_spd(n, rng));
        const Eigen::MatrixXd x = gaussian_design(n, features, rng);
        const Eigen::VectorXd a = weighted_pinv_spectrum(x, features);
        const Eigen::MatrixXd g = alignment_matrix(x, features, noise).gamma;
        const Eigen::VectorXd lam = noise.eigenvalues().reverse();
        KahanAccumulator sum;
        for (Eigen::Index i = 0; i < a.size(); ++i)
            for (Eigen::Index j = 0; j < lam.size(); ++j) sum.add(a(i) * g(i, j) * lam(j));
        const double truth = var_pred_conditional(x, noise, features);
        worst = std::max(worst, std::abs(sum.total() - truth) / std::abs(truth));
    }
    return make_check("reconstruction_identity", worst, 0.0, 1e-6);
}

}  // namespace

VerifyReport run_verify_checks(std::uint64_t seed, const std::string& inject_fault) {
    if (!inject_fault.empty() && inject_fault != "none" && inject_fault != "frozen-rotation")
        throw ConfigError("unknown fault '" + inject_fault +
                          "' (known faults: frozen-rotation)");
    const bool frozen = inject_fault == "frozen-rotation";

    RandomStream root(seed);
    VerifyReport report;
    report.seed = seed;
    report.injected_fault = frozen ? inject_fault : "none";
    report.checks.push_back(check_penrose(root.substream(1)));
    report.checks.push_back(check_min_norm(root.substream(2)));
    report.checks.push_back(check_doubly_stochastic(root.substream(3)));
    report.checks.push_back(check_haar_average(root.substream(4), frozen));
    report.checks.push_back(check_trace_only(root.substream(5), seed));
    report.checks.push_back(check_bias_rank_deficiency(root.substream(6), seed));
    report.checks.push_back(check_stieltjes_isotropic());
    report.checks.push_back(check_stieltjes_residual(root.substream(8)));
    report.checks.push_back(check_bound_ordering(root.substream(9)));
    report.checks.push_back(check_reconstruction(root.substream(10)));
    report.all_pass = true;
    for (const VerifyCheck& c : report.checks) report.all_pass = report.all_pass && c.pass;
    return report;
}

int run_verify(const ExperimentConfig& cfg) {
    const VerifyReport report = run_verify_checks(cfg.seed, cfg.inject_fault);

    int failed = 0;
    for (const VerifyCheck& c : report.checks) {
        if (!c.pass) ++failed;
        std::printf("[%s] %-24s observed=%-13.6g expected=%-13.6g tolerance=%.6g\n",
                    c.pass ? " ok " : "FAIL", c.name.c_str(), c.observed, c.expected,
                    c.tolerance);
    }
    std::printf("verify: %zu/%zu checks passed\n", report.checks.size() - failed,
                report.checks.size());

    nlohmann::json doc;
    doc["version"] = kVersion;
    doc["seed"] = report.seed;
    doc["injected_fault"] = report.injected_fault;
    doc["all_pass"] = report.all_pass;
    doc["checks"] = nlohmann::json::array();
    for (const VerifyCheck& c : report.checks) {
        doc["checks"].push_back({{"name", c.name},
                                 {"observed", c.observed},
                                 {"expected", c.expected},
                                 {"tolerance", c.tolerance},
                                 {"pass", c.pass}});
    }
    const std::string path = cfg.output.empty() ? "verify_report.json" : cfg.output;
    std::ofstream out(path);
    if (!out) throw ConfigError(path + ": cannot open output file for writing");
    out << doc.dump(2) << "\n";
    return report.all_pass ? 0 : 1;
}

}  // namespace risklab
