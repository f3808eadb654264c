#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "risklab/errors.hpp"
#include "risklab/models.hpp"

namespace risklab {

// Discrete probability measure on a positive spectrum. Support bounds and
// the mean are recomputed from the atoms, never trusted from input.
class SpectrumMeasure {
public:
    static SpectrumMeasure from_atoms(const std::vector<std::pair<double, double>>& atoms);

    // Point mass 1/k on each of the k eigenvalues.
    static SpectrumMeasure from_eigenvalues(const Eigen::VectorXd& eigenvalues);
    static SpectrumMeasure from_features(const FeatureModel& features);

    const std::vector<double>& atoms() const { return atoms_; }
    const std::vector<double>& weights() const { return weights_; }
    double support_min() const { return support_min_; }
    double support_max() const { return support_max_; }
    double mean() const { return mean_; }

private:
    SpectrumMeasure() = default;

    std::vector<double> atoms_;
    std::vector<double> weights_;
    double support_min_ = 0.0;
    double support_max_ = 0.0;
    double mean_ = 0.0;
};

struct SStarBounds {
    double lower = 0.0;       // 1 / (C_H (gamma - 1))
    double upper = 0.0;       // 1 / (c_H (gamma - 1))
    double tight_lower = 0.0; // 1 / (mu_H (gamma - 1))
};

struct AsymptoticResult {
    double gamma = 0.0;
    double s_star = 0.0;
    double limit_risk = 0.0;
    double kappa2 = 0.0;
    double r2 = 0.0;
};

// sum_i w_i / (1 + tau_i s); strictly decreasing in s with range (0, 1).
double stieltjes_rhs(const SpectrumMeasure& h, double s);

// Solves sum_i w_i / (1 + tau_i s) = 1 - 1/gamma by bisection on the
// bracket [1/(mu_H (gamma-1)), 1/(c_H (gamma-1))]; the returned root s*
// satisfies |stieltjes_rhs(h, s*) - (1 - 1/gamma)| < tol.
double solve_s_star(const SpectrumMeasure& h, double gamma, double tol = 1e-12);

SStarBounds s_star_bounds(const SpectrumMeasure& h, double gamma);

// Limiting estimation risk r2 (1 - 1/gamma) + s* kappa2.
AsymptoticResult limit_estimation_risk(double r2, double kappa2, double gamma,
                                       const SpectrumMeasure& h);

}  // namespace risklab
