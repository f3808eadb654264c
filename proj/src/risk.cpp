#include "risklab/risk.hpp"

#include <cmath>
#include <string>

#include "risklab/errors.hpp"
#include "risklab/linalg.hpp"
#include "risklab/numeric.hpp"

namespace risklab {

namespace {

constexpr long kMaxAttempts = 64;

struct ReplicateFactors {
    SvdFactors svd;
    long attempts = 0;
};

// Draws the design for one replicate, resampling rank-deficient draws on
// fresh substreams.
ReplicateFactors draw_full_rank_design(const FeatureModel& features, Eigen::Index n,
                                       const McConfig& cfg, const DesignSampler& sampler,
                                       std::uint64_t index) {
    for (long attempt = 0; attempt < kMaxAttempts; ++attempt) {
        RandomStream rng(cfg.seed, stream_for(stream_role::design, index,
                                              static_cast<std::uint64_t>(attempt)));
        Eigen::MatrixXd x = sampler ? sampler(n, features, rng)
                                    : gaussian_design(n, features, rng);
        SvdFactors f = svd_thin(x);
        if (f.numerical_rank >= n) return {std::move(f), attempt};
    }
    throw RankDeficient("draw_full_rank_design: replicate " + std::to_string(index) +
                        " stayed rank deficient after " + std::to_string(kMaxAttempts) +
                        " attempts");
}

double mean_of(const std::vector<double>& xs) {
    return compensated_sum(xs) / static_cast<double>(xs.size());
}

}  // namespace

std::uint64_t stream_for(std::uint64_t role, std::uint64_t index, std::uint64_t attempt) {
    return (attempt << 43) | (index << 3) | role;
}

void validate(const McConfig& cfg) {
    if (cfg.n_x < 2 || cfg.n_eps < 2 || cfg.n_beta < 2)
        throw InvalidParameter("McConfig: replicate counts must all be >= 2");
}

DesignBatch make_design_batch(const FeatureModel& features, Eigen::Index n,
                              const McConfig& cfg, const BatchOptions& options,
                              const DesignSampler& sampler, unsigned threads) {
    validate(cfg);
    if (n < 1) throw InvalidParameter("make_design_batch: n must be >= 1");
    const std::size_t m = static_cast<std::size_t>(cfg.n_x);
    DesignBatch batch;
    batch.n = n;
    batch.p = features.p();
    batch.trace_pred.resize(m);
    batch.trace_est.resize(m);
    if (options.store_grams) {
        batch.gram_pred.resize(m);
        batch.gram_est.resize(m);
    }
    if (options.store_row_basis) batch.row_basis.resize(m);
    std::vector<long> attempts(m, 0);

    const bool isotropic = features.kind() == FeatureKind::isotropic;
    parallel_for(m, [&](std::size_t i) {
        ReplicateFactors rep = draw_full_rank_design(features, n, cfg, sampler, i);
        attempts[i] = rep.attempts;
        const SvdFactors& f = rep.svd;
        const auto v = f.v.leftCols(n);
        const auto d = f.singular_values.head(n);

        // W = S V; column norms over d_i^2 give Tr((X^T X)^+ Sigma).
        Eigen::MatrixXd w = isotropic ? Eigen::MatrixXd(v) : Eigen::MatrixXd(features.sqrt() * v);
        KahanAccumulator tp;
        KahanAccumulator te;
        for (Eigen::Index k = 0; k < n; ++k) {
            const double inv_d2 = 1.0 / (d(k) * d(k));
            tp.add(isotropic ? inv_d2 : w.col(k).squaredNorm() * inv_d2);
            te.add(inv_d2);
        }
        batch.trace_pred[i] = tp.total();
        batch.trace_est[i] = te.total();

        if (options.store_grams) {
            Eigen::MatrixXd wd = w * d.cwiseInverse().asDiagonal();     // S V D^{-1}
            Eigen::MatrixXd core = wd.transpose() * wd;                 // D^{-1} V^T Sigma V D^{-1}
            batch.gram_pred[i] = f.u * core * f.u.transpose();
            batch.gram_est[i] =
                f.u * d.cwiseProduct(d).cwiseInverse().asDiagonal() * f.u.transpose();
        }
        if (options.store_row_basis) batch.row_basis[i] = v;
    }, threads);

    KahanAccumulator resampled;
    for (long a : attempts) resampled.add(static_cast<double>(a));
    batch.resampled = static_cast<long>(resampled.total());
    if (batch.resampled > cfg.n_x / 100)
        throw RankDeficient("make_design_batch: " + std::to_string(batch.resampled) +
                            " rank-deficient draws out of " + std::to_string(cfg.n_x));
    return batch;
}

Estimate mc_variance_from_batch(const DesignBatch& batch, const NoiseCovariance& noise,
                                RiskTarget target) {
    if (noise.n() != batch.n)
        throw DimensionError("mc_variance_from_batch: noise dimension does not match batch");
    const auto& grams = target == RiskTarget::prediction ? batch.gram_pred : batch.gram_est;
    if (grams.empty())
        throw InvalidParameter("mc_variance_from_batch: batch was built without gram matrices");
    std::vector<double> vals(grams.size());
    for (std::size_t i = 0; i < grams.size(); ++i)
        vals[i] = trace_inner(grams[i], noise.omega());
    MeanStdErr ms = mean_std_error(vals);
    return {ms.mean, ms.std_error};
}

double theory_variance_from_batch(const DesignBatch& batch, const NoiseCovariance& noise,
                                  RiskTarget target) {
    if (noise.n() != batch.n)
        throw DimensionError("theory_variance_from_batch: noise dimension does not match batch");
    const auto& traces = target == RiskTarget::prediction ? batch.trace_pred : batch.trace_est;
    return noise.trace_over_n() * mean_of(traces);
}

Estimate mc_expected_variance(const FeatureModel& features, const NoiseCovariance& noise,
                              Eigen::Index n, const McConfig& cfg, RiskTarget target,
                              unsigned threads) {
    DesignBatch batch = make_design_batch(features, n, cfg, {}, {}, threads);
    return mc_variance_from_batch(batch, noise, target);
}

double theory_expected_variance(const FeatureModel& features, const NoiseCovariance& noise,
                                Eigen::Index n, const McConfig& cfg, RiskTarget target,
                                unsigned threads) {
    BatchOptions opt;
    opt.store_grams = false;
    DesignBatch batch = make_design_batch(features, n, cfg, opt, {}, threads);
    return theory_variance_from_batch(batch, noise, target);
}

Estimate mc_expected_variance_empirical(const FeatureModel& features,
                                        const NoiseCovariance& noise, Eigen::Index n,
                                        const McConfig& cfg, RiskTarget target,
                                        unsigned threads) {
    validate(cfg);
    if (noise.n() != n)
        throw DimensionError("mc_expected_variance_empirical: noise dimension mismatch");
    const std::size_t m = static_cast<std::size_t>(cfg.n_x);
    const Eigen::Index p = features.p();
    const long n_eps = cfg.n_eps;
    const bool weighted = target == RiskTarget::prediction &&
                          features.kind() != FeatureKind::isotropic;
    std::vector<double> vals(m);
    parallel_for(m, [&](std::size_t i) {
        ReplicateFactors rep = draw_full_rank_design(features, n, cfg, {}, i);
        const SvdFactors& f = rep.svd;
        Eigen::MatrixXd pinv = f.v.leftCols(n) *
                               f.singular_values.head(n).cwiseInverse().asDiagonal() *
                               f.u.transpose();
        RandomStream noise_rng(cfg.seed, stream_for(stream_role::noise, i));
        Eigen::MatrixXd fits(p, n_eps);
        Eigen::VectorXd z(n);
        for (long j = 0; j < n_eps; ++j) {
            for (Eigen::Index k = 0; k < n; ++k) z(k) = noise_rng.normal();
            fits.col(j) = pinv * (noise.sqrt() * z);
        }
        Eigen::VectorXd center = fits.rowwise().mean();
        KahanAccumulator acc;
        for (long j = 0; j < n_eps; ++j) {
            Eigen::VectorXd dev = fits.col(j) - center;
            if (weighted) dev = features.sqrt() * dev;
            acc.add(dev.squaredNorm());
        }
        vals[i] = acc.total() / static_cast<double>(n_eps - 1);
    }, threads);
    MeanStdErr ms = mean_std_error(vals);
    return {ms.mean, ms.std_error};
}

double theory_bias2(double r2_weighted, Eigen::Index n, Eigen::Index p) {
    if (p < n)
        throw InvalidRegime("theory_bias2: requires p >= n, got p = " + std::to_string(p) +
                            ", n = " + std::to_string(n));
    if (r2_weighted < 0.0) throw InvalidParameter("theory_bias2: r2 must be >= 0");
    return r2_weighted * static_cast<double>(p - n) / static_cast<double>(p);
}

Estimate mc_bias2_from_batch(const DesignBatch& batch, const FeatureModel& features,
                             double r2, const McConfig& cfg, RiskTarget target) {
    validate(cfg);
    if (batch.row_basis.empty())
        throw InvalidParameter("mc_bias2_from_batch: batch was built without row bases");
    if (features.p() != batch.p)
        throw DimensionError("mc_bias2_from_batch: feature dimension does not match batch");
    const std::size_t m = batch.row_basis.size();
    const bool weighted = target == RiskTarget::prediction &&
                          features.kind() != FeatureKind::isotropic;
    std::vector<double> per_design(m);
    for (std::size_t i = 0; i < m; ++i) {
        const Eigen::MatrixXd& v = batch.row_basis[i];
        RandomStream beta_rng(cfg.seed, stream_for(stream_role::beta, i));
        KahanAccumulator acc;
        for (long j = 0; j < cfg.n_beta; ++j) {
            Eigen::VectorXd beta = target == RiskTarget::prediction
                                       ? sample_beta_weighted(features, r2, beta_rng)
                                       : sample_beta(batch.p, r2, beta_rng);
            Eigen::VectorXd resid = beta - v * (v.transpose() * beta);
            if (weighted) resid = features.sqrt() * resid;
            acc.add(resid.squaredNorm());
        }
        per_design[i] = acc.total() / static_cast<double>(cfg.n_beta);
    }
    MeanStdErr ms = mean_std_error(per_design);
    return {ms.mean, ms.std_error};
}

Estimate mc_expected_bias2(const FeatureModel& features, Eigen::Index n, Eigen::Index p,
                           double r2, const McConfig& cfg, RiskTarget target,
                           unsigned threads) {
    if (features.p() != p)
        throw DimensionError("mc_expected_bias2: feature dimension does not match p");
    if (p < n) throw InvalidRegime("mc_expected_bias2: requires p >= n");
    BatchOptions opt;
    opt.store_grams = false;
    opt.store_row_basis = true;
    DesignBatch batch = make_design_batch(features, n, cfg, opt, {}, threads);
    return mc_bias2_from_batch(batch, features, r2, cfg, target);
}

RiskReport full_report(const FeatureModel& features, const NoiseCovariance& noise,
                       Eigen::Index n, Eigen::Index p, double r2, double r_sigma2,
                       const McConfig& cfg, unsigned threads) {
    if (features.p() != p) throw DimensionError("full_report: feature dimension mismatch");
    if (noise.n() != n) throw DimensionError("full_report: noise dimension mismatch");
    BatchOptions opt;
    opt.store_grams = true;
    opt.store_row_basis = true;
    DesignBatch batch = make_design_batch(features, n, cfg, opt, {}, threads);

    RiskReport rep;
    rep.n = n;
    rep.p = p;
    rep.r2 = r2;
    rep.r_sigma2 = r_sigma2;
    rep.trace_omega_over_n = noise.trace_over_n();
    rep.resampled = batch.resampled;
    rep.mc_var_pred = mc_variance_from_batch(batch, noise, RiskTarget::prediction);
    rep.mc_var_est = mc_variance_from_batch(batch, noise, RiskTarget::estimation);
    rep.theory_var_pred = theory_variance_from_batch(batch, noise, RiskTarget::prediction);
    rep.theory_var_est = theory_variance_from_batch(batch, noise, RiskTarget::estimation);
    rep.mc_bias2_pred = mc_bias2_from_batch(batch, features, r_sigma2, cfg,
                                            RiskTarget::prediction);
    rep.mc_bias2_est = mc_bias2_from_batch(batch, features, r2, cfg, RiskTarget::estimation);
    rep.theory_bias2_pred = theory_bias2(r_sigma2, n, p);
    rep.theory_bias2_est = theory_bias2(r2, n, p);
    return rep;
}

}  // namespace risklab
