#include "risklab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "risklab/numeric.hpp"

namespace risklab {

SpectrumMeasure SpectrumMeasure::from_atoms(
    const std::vector<std::pair<double, double>>& atoms) {
    if (atoms.empty()) throw InvalidParameter("SpectrumMeasure: no atoms");
    SpectrumMeasure h;
    KahanAccumulator wsum;
    KahanAccumulator msum;
    h.support_min_ = atoms.front().first;
    h.support_max_ = atoms.front().first;
    for (const auto& [tau, w] : atoms) {
        if (tau <= 0.0) throw InvalidParameter("SpectrumMeasure: atom location must be > 0");
        if (w <= 0.0) throw InvalidParameter("SpectrumMeasure: atom weight must be > 0");
        h.atoms_.push_back(tau);
        h.weights_.push_back(w);
        wsum.add(w);
        msum.add(w * tau);
        h.support_min_ = std::min(h.support_min_, tau);
        h.support_max_ = std::max(h.support_max_, tau);
    }
    if (std::abs(wsum.total() - 1.0) > 1e-12)
        throw InvalidParameter("SpectrumMeasure: weights sum to " +
                               std::to_string(wsum.total()) + ", expected 1");
    h.mean_ = msum.total();
    return h;
}

SpectrumMeasure SpectrumMeasure::from_eigenvalues(const Eigen::VectorXd& eigenvalues) {
    if (eigenvalues.size() == 0) throw InvalidParameter("SpectrumMeasure: empty spectrum");
    std::vector<std::pair<double, double>> atoms;
    const double w = 1.0 / static_cast<double>(eigenvalues.size());
    atoms.reserve(static_cast<std::size_t>(eigenvalues.size()));
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
        atoms.emplace_back(eigenvalues(i), w);
    return from_atoms(atoms);
}

SpectrumMeasure SpectrumMeasure::from_features(const FeatureModel& features) {
    return from_eigenvalues(features.eigenvalues());
}

double stieltjes_rhs(const SpectrumMeasure& h, double s) {
    if (s <= 0.0) throw InvalidParameter("stieltjes_rhs: s must be > 0");
    KahanAccumulator acc;
    for (std::size_t i = 0; i < h.atoms().size(); ++i)
        acc.add(h.weights()[i] / (1.0 + h.atoms()[i] * s));
    return acc.total();
}

SStarBounds s_star_bounds(const SpectrumMeasure& h, double gamma) {
    if (gamma <= 1.0) throw InvalidRegime("s_star_bounds: gamma must be > 1");
    const double g = gamma - 1.0;
    return {1.0 / (h.support_max() * g), 1.0 / (h.support_min() * g), 1.0 / (h.mean() * g)};
}

double solve_s_star(const SpectrumMeasure& h, double gamma, double tol) {
    if (gamma <= 1.0) throw InvalidRegime("solve_s_star: gamma must be > 1");
    if (tol <= 0.0) throw InvalidParameter("solve_s_star: tol must be > 0");
    const double target = 1.0 - 1.0 / gamma;
    SStarBounds b = s_star_bounds(h, gamma);
    double lo = b.tight_lower * (1.0 - 1e-9);
    double hi = b.upper * (1.0 + 1e-9);
    // stieltjes_rhs decreases in s, so rhs(lo) >= target >= rhs(hi).
    double mid = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        mid = 0.5 * (lo + hi);
        const double val = stieltjes_rhs(h, mid);
        if (std::abs(val - target) < tol) return mid;
        if (val > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return mid;
}

AsymptoticResult limit_estimation_risk(double r2, double kappa2, double gamma,
                                       const SpectrumMeasure& h) {
    AsymptoticResult res;
    res.gamma = gamma;
    res.r2 = r2;
    res.kappa2 = kappa2;
    res.s_star = solve_s_star(h, gamma);
    res.limit_risk = r2 * (1.0 - 1.0 / gamma) + res.s_star * kappa2;
    return res;
}

}  // namespace risklab
