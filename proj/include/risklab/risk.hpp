#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "risklab/models.hpp"
#include "risklab/sampler.hpp"

namespace risklab {

// Replicate counts for the nested Monte Carlo estimators: n_x design draws,
// n_eps noise draws per design, n_beta coefficient draws per design.
struct McConfig {
    long n_x = 100;
    long n_eps = 100;
    long n_beta = 100;
    std::uint64_t seed = 1;
};

void validate(const McConfig& cfg);  // every count >= 2

enum class RiskTarget { prediction, estimation };

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

// What a design batch should keep per replicate. Traces are always kept;
// Gram matrices and row-space bases are optional because they dominate
// memory at large n.
struct BatchOptions {
    bool store_grams = true;
    bool store_row_basis = false;
};

// Per-design-replicate building blocks shared by every noise model in a
// sweep: contracting gram_pred (gram_est) against Omega gives the exact
// conditional variance of the prediction (estimation) risk, and the trace
// fields are the per-replicate theory factors.
struct DesignBatch {
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    std::vector<Eigen::MatrixXd> gram_pred;   // (S X^+)^T (S X^+), n x n
    std::vector<Eigen::MatrixXd> gram_est;    // (X X^T)^+, n x n
    std::vector<Eigen::MatrixXd> row_basis;   // top-rank right singular vectors, p x n
    std::vector<double> trace_pred;           // Tr((X^T X)^+ Sigma)
    std::vector<double> trace_est;            // Tr((X X^T)^+)
    long resampled = 0;
};

// Draws cfg.n_x designs on substreams derived from (cfg.seed, replicate
// index) only, so batches with equal (features, n, cfg) are identical no
// matter which noise model or thread count consumes them. Rank-deficient
// draws are resampled on fresh substreams; more than 1% of them aborts.
DesignBatch make_design_batch(const FeatureModel& features, Eigen::Index n,
                              const McConfig& cfg, const BatchOptions& options = {},
                              const DesignSampler& sampler = {}, unsigned threads = 0);

// Mean and standard error of the exact conditional variance across the
// batch; the noise enters only through its covariance matrix.
Estimate mc_variance_from_batch(const DesignBatch& batch, const NoiseCovariance& noise,
                                RiskTarget target);

// (Tr(Omega)/n) times the batch mean of the trace factor.
double theory_variance_from_batch(const DesignBatch& batch, const NoiseCovariance& noise,
                                  RiskTarget target);

// Convenience wrappers that build the batch themselves from cfg.
Estimate mc_expected_variance(const FeatureModel& features, const NoiseCovariance& noise,
                              Eigen::Index n, const McConfig& cfg, RiskTarget target,
                              unsigned threads = 0);
double theory_expected_variance(const FeatureModel& features, const NoiseCovariance& noise,
                                Eigen::Index n, const McConfig& cfg, RiskTarget target,
                                unsigned threads = 0);

// Literal nested estimator: per design replicate, the trace of the
// empirical covariance of the fitted coefficients over cfg.n_eps fresh
// noise draws (Sigma-weighted for the prediction target). The design
// substreams match make_design_batch, so this path sees the same X draws.
Estimate mc_expected_variance_empirical(const FeatureModel& features,
                                        const NoiseCovariance& noise, Eigen::Index n,
                                        const McConfig& cfg, RiskTarget target,
                                        unsigned threads = 0);

// r2_weighted * (p - n) / p; requires p >= n.
double theory_bias2(double r2_weighted, Eigen::Index n, Eigen::Index p);

// Average of the conditional squared bias over cfg.n_beta coefficient draws
// per design and cfg.n_x designs. Estimation target draws beta with
// E[beta beta^T] = (r2/p) I; prediction target draws beta = S^{-1} w with
// E[w w^T] = (r2/p) I and weights the bias by Sigma.
Estimate mc_expected_bias2(const FeatureModel& features, Eigen::Index n, Eigen::Index p,
                           double r2, const McConfig& cfg, RiskTarget target,
                           unsigned threads = 0);
Estimate mc_bias2_from_batch(const DesignBatch& batch, const FeatureModel& features,
                             double r2, const McConfig& cfg, RiskTarget target);

// All bias/variance components of both risks for one configuration.
struct RiskReport {
    Estimate mc_var_pred;
    Estimate mc_var_est;
    Estimate mc_bias2_pred;
    Estimate mc_bias2_est;
    double theory_var_pred = 0.0;
    double theory_var_est = 0.0;
    double theory_bias2_pred = 0.0;
    double theory_bias2_est = 0.0;
    double r2 = 0.0;
    double r_sigma2 = 0.0;
    double trace_omega_over_n = 0.0;
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    long resampled = 0;
};

RiskReport full_report(const FeatureModel& features, const NoiseCovariance& noise,
                       Eigen::Index n, Eigen::Index p, double r2, double r_sigma2,
                       const McConfig& cfg, unsigned threads = 0);

// Substream addressing shared by the MC paths (exposed for tests).
namespace stream_role {
inline constexpr std::uint64_t design = 1;
inline constexpr std::uint64_t noise = 2;
inline constexpr std::uint64_t beta = 3;
inline constexpr std::uint64_t rho = 4;
}  // namespace stream_role

std::uint64_t stream_for(std::uint64_t role, std::uint64_t index, std::uint64_t attempt = 0);

}  // namespace risklab
