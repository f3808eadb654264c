#include "risklab/experiments.hpp"

#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <iostream>

#include "risklab/errors.hpp"
#include "risklab/numeric.hpp"
#include "risklab/version.hpp"

namespace risklab {

namespace {

std::string iso_timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) line += ',';
        line += cells[i];
    }
    return line;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const ExperimentConfig& cfg) : out_(path) {
        if (!out_) throw ConfigError(path + ": cannot open output file for writing");
        out_ << "# risklab " << kVersion << "\n";
        out_ << "# experiment: " << cfg.experiment << "\n";
        out_ << "# config: " << config_echo(cfg) << "\n";
        out_ << "# seed: " << cfg.seed << "\n";
        out_ << "# timestamp: " << iso_timestamp() << "\n";
    }

    void columns(const std::vector<std::string>& names) { out_ << join(names) << "\n"; }
    void row(const std::vector<std::string>& cells) { out_ << join(cells) << "\n"; }

private:
    std::ofstream out_;
};

struct GridRow {
    bool ok = false;
    std::string error;
    std::vector<std::string> cells;
};

// Evaluates one grid point into an ordered row; exceptions become per-point
// diagnostics instead of aborting the sweep.
std::vector<GridRow> evaluate_grid(std::size_t count,
                                   const std::function<std::vector<std::string>(std::size_t)>& fn,
                                   unsigned threads, bool parallel) {
    std::vector<GridRow> rows(count);
    auto body = [&](std::size_t k) {
        try {
            rows[k].cells = fn(k);
            rows[k].ok = true;
        } catch (const std::exception& e) {
            rows[k].error = e.what();
        }
    };
    if (parallel) {
        parallel_for(count, body, threads);
    } else {
        for (std::size_t k = 0; k < count; ++k) body(k);
    }
    return rows;
}

int write_rows(CsvWriter& csv, const std::vector<GridRow>& rows, const char* experiment) {
    int skipped = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k].ok) {
            csv.row(rows[k].cells);
        } else {
            ++skipped;
            std::cerr << experiment << ": skipping grid point " << k << ": " << rows[k].error
                      << "\n";
        }
    }
    return skipped;
}

std::vector<std::string> risk_cells(const Estimate& mc_pred, double theory_pred,
                                    const Estimate& mc_est, double theory_est) {
    return {format_double(mc_pred.value), format_double(mc_pred.std_error),
            format_double(theory_pred),   format_double(mc_est.value),
            format_double(mc_est.std_error), format_double(theory_est)};
}

void append(std::vector<std::string>& to, const std::vector<std::string>& cells) {
    to.insert(to.end(), cells.begin(), cells.end());
}

const std::vector<std::string> kRiskColumns = {
    "mc_var_pred", "mc_var_pred_se", "theory_var_pred",
    "mc_var_est",  "mc_var_est_se",  "theory_var_est"};

}  // namespace

FeatureModel build_features(const FeatureSpec& spec, Eigen::Index p) {
    if (spec.kind == "isotropic") return build_isotropic_features(p);
    if (spec.kind == "haar_spectrum") {
        RandomStream rng(spec.seed);
        return build_sigma_haar_spectrum(p, rng);
    }
    throw ConfigError("unknown feature kind '" + spec.kind + "'");
}

int run_ar1_sweep(const ExperimentConfig& cfg) {
    if (cfg.output.empty()) throw ConfigError("ar1_sweep: output path is required");
    FeatureModel features = build_features(cfg.features, cfg.p);
    BatchOptions opt;
    opt.store_grams = !cfg.empirical_cov;
    DesignBatch batch = make_design_batch(features, cfg.n, cfg.mc, opt, {}, cfg.threads);

    const std::size_t n_rho = cfg.ar1.rho2.size();
    const std::size_t count = cfg.ar1.sigma2.size() * n_rho;
    auto point = [&](std::size_t k) {
        const double sigma2 = cfg.ar1.sigma2[k / n_rho];
        const double rho2 = cfg.ar1.rho2[k % n_rho];
        NoiseCovariance noise = build_ar1(cfg.n, sigma2, std::sqrt(rho2));
        Estimate mc_pred, mc_est;
        if (cfg.empirical_cov) {
            mc_pred = mc_expected_variance_empirical(features, noise, cfg.n, cfg.mc,
                                                     RiskTarget::prediction, cfg.threads);
            mc_est = mc_expected_variance_empirical(features, noise, cfg.n, cfg.mc,
                                                    RiskTarget::estimation, cfg.threads);
        } else {
            mc_pred = mc_variance_from_batch(batch, noise, RiskTarget::prediction);
            mc_est = mc_variance_from_batch(batch, noise, RiskTarget::estimation);
        }
        std::vector<std::string> cells = {format_double(sigma2), format_double(rho2),
                                          format_double(noise.trace_over_n())};
        append(cells, risk_cells(
            mc_pred, theory_variance_from_batch(batch, noise, RiskTarget::prediction),
            mc_est, theory_variance_from_batch(batch, noise, RiskTarget::estimation)));
        return cells;
    };
    auto rows = evaluate_grid(count, point, cfg.threads, !cfg.empirical_cov);

    CsvWriter csv(cfg.output, cfg);
    std::vector<std::string> names = {"sigma2", "rho2", "trace_over_n"};
    append(names, kRiskColumns);
    csv.columns(names);
    write_rows(csv, rows, "ar1_sweep");
    return 0;
}

namespace {

int run_cluster_like(const ExperimentConfig& cfg, bool random_offdiag) {
    const char* name = random_offdiag ? "offdiag_study" : "cluster_sweep";
    if (cfg.output.empty()) throw ConfigError(std::string(name) + ": output path is required");
    const Eigen::Index n = cfg.cluster.n1 + cfg.cluster.n2;
    FeatureModel features = build_features(cfg.features, cfg.p);
    BatchOptions opt;
    opt.store_grams = !cfg.empirical_cov;
    DesignBatch batch = make_design_batch(features, n, cfg.mc, opt, {}, cfg.threads);

    const std::size_t n_s2 = cfg.cluster.sigma2_2.size();
    const std::size_t count = cfg.cluster.sigma1_2.size() * n_s2;
    auto point = [&](std::size_t k) {
        const double s1 = cfg.cluster.sigma1_2[k / n_s2];
        const double s2 = cfg.cluster.sigma2_2[k % n_s2];
        double rho1 = cfg.cluster.rho1;
        double rho2 = cfg.cluster.rho2;
        if (random_offdiag) {
            RandomStream rr(cfg.offdiag.rho_seed, stream_for(stream_role::rho, k));
            rho1 = rr.uniform() * cfg.offdiag.rho_max;
            rho2 = rr.uniform() * cfg.offdiag.rho_max;
        }
        NoiseCovariance noise = build_clustered(
            {{cfg.cluster.n1, s1, rho1}, {cfg.cluster.n2, s2, rho2}});
        Estimate mc_pred, mc_est;
        if (cfg.empirical_cov) {
            mc_pred = mc_expected_variance_empirical(features, noise, n, cfg.mc,
                                                     RiskTarget::prediction, cfg.threads);
            mc_est = mc_expected_variance_empirical(features, noise, n, cfg.mc,
                                                    RiskTarget::estimation, cfg.threads);
        } else {
            mc_pred = mc_variance_from_batch(batch, noise, RiskTarget::prediction);
            mc_est = mc_variance_from_batch(batch, noise, RiskTarget::estimation);
        }
        std::vector<std::string> cells = {format_double(s1), format_double(s2)};
        if (random_offdiag) {
            cells.push_back(format_double(rho1));
            cells.push_back(format_double(rho2));
        }
        cells.push_back(format_double(noise.trace_over_n()));
        append(cells, risk_cells(
            mc_pred, theory_variance_from_batch(batch, noise, RiskTarget::prediction),
            mc_est, theory_variance_from_batch(batch, noise, RiskTarget::estimation)));
        return cells;
    };
    auto rows = evaluate_grid(count, point, cfg.threads, !cfg.empirical_cov);

    CsvWriter csv(cfg.output, cfg);
    std::vector<std::string> names = {"sigma1_2", "sigma2_2"};
    if (random_offdiag) {
        names.push_back("rho1_draw");
        names.push_back("rho2_draw");
    }
    names.push_back("trace_over_n");
    append(names, kRiskColumns);
    csv.columns(names);
    write_rows(csv, rows, name);
    return 0;
}

}  // namespace

int run_cluster_sweep(const ExperimentConfig& cfg) { return run_cluster_like(cfg, false); }

int run_offdiag_study(const ExperimentConfig& cfg) { return run_cluster_like(cfg, true); }

int run_descent_curve(const ExperimentConfig& cfg) {
    if (cfg.output.empty()) throw ConfigError("descent_curve: output path is required");
    const Eigen::Index n = cfg.n;

    struct GammaBlock {
        double gamma = 0.0;
        Eigen::Index p = 0;
        bool ok = false;
        std::string error;
        DesignBatch batch;
        FeatureModel features = build_isotropic_features(1);
    };
    std::vector<GammaBlock> blocks(cfg.descent.gamma.size());
    for (std::size_t g = 0; g < blocks.size(); ++g) {
        GammaBlock& blk = blocks[g];
        blk.gamma = cfg.descent.gamma[g];
        blk.p = static_cast<Eigen::Index>(std::llround(blk.gamma * static_cast<double>(n)));
        if (blk.p <= n) {
            blk.error = "p = " + std::to_string(blk.p) + " does not exceed n = " +
                        std::to_string(n);
            continue;
        }
        try {
            FeatureSpec spec = cfg.features;
            spec.seed = RandomStream::mix64(cfg.features.seed + g);
            blk.features = build_features(spec, blk.p);
            BatchOptions opt;
            opt.store_grams = false;
            blk.batch = make_design_batch(blk.features, n, cfg.mc, opt, {}, cfg.threads);
            blk.ok = true;
        } catch (const std::exception& e) {
            blk.error = e.what();
        }
    }

    CsvWriter csv(cfg.output, cfg);
    csv.columns({"gamma", "p", "omega2", "mc_var_pred", "mc_var_pred_se", "theory_var_pred",
                 "mc_var_est", "mc_var_est_se", "theory_var_est", "theory_bias2",
                 "asymptotic_var", "asymptotic_risk"});
    for (std::size_t g = 0; g < blocks.size(); ++g) {
        const GammaBlock& blk = blocks[g];
        if (!blk.ok) {
            std::cerr << "descent_curve: skipping gamma " << cfg.descent.gamma[g] << ": "
                      << blk.error << "\n";
            continue;
        }
        for (double omega2 : cfg.descent.trace_levels) {
            NoiseCovariance noise = build_isotropic_noise(n, omega2);
            Estimate mc_pred, mc_est;
            if (cfg.empirical_cov) {
                mc_pred = mc_expected_variance_empirical(blk.features, noise, n, cfg.mc,
                                                         RiskTarget::prediction, cfg.threads);
                mc_est = mc_expected_variance_empirical(blk.features, noise, n, cfg.mc,
                                                        RiskTarget::estimation, cfg.threads);
            } else {
                // With isotropic noise the conditional variance is omega2
                // times the per-replicate trace factor.
                std::vector<double> vp(blk.batch.trace_pred.size());
                std::vector<double> ve(blk.batch.trace_est.size());
                for (std::size_t i = 0; i < vp.size(); ++i) {
                    vp[i] = omega2 * blk.batch.trace_pred[i];
                    ve[i] = omega2 * blk.batch.trace_est[i];
                }
                MeanStdErr mp = mean_std_error(vp);
                MeanStdErr me = mean_std_error(ve);
                mc_pred = {mp.mean, mp.std_error};
                mc_est = {me.mean, me.std_error};
            }
            const double theory_pred =
                theory_variance_from_batch(blk.batch, noise, RiskTarget::prediction);
            const double theory_est =
                theory_variance_from_batch(blk.batch, noise, RiskTarget::estimation);
            const double asym_var = omega2 / (blk.gamma - 1.0);
            std::vector<std::string> cells = {
                format_double(blk.gamma), std::to_string(blk.p), format_double(omega2)};
            append(cells, risk_cells(mc_pred, theory_pred, mc_est, theory_est));
            cells.push_back(format_double(theory_bias2(cfg.r2, n, blk.p)));
            cells.push_back(format_double(asym_var));
            cells.push_back(format_double(cfg.r2 * (1.0 - 1.0 / blk.gamma) + asym_var));
            csv.row(cells);
        }
    }
    return 0;
}

int run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    if (cfg.experiment == "ar1_sweep") return run_ar1_sweep(cfg);
    if (cfg.experiment == "cluster_sweep") return run_cluster_sweep(cfg);
    if (cfg.experiment == "offdiag_study") return run_offdiag_study(cfg);
    if (cfg.experiment == "descent_curve") return run_descent_curve(cfg);
    if (cfg.experiment == "verify") return run_verify(cfg);
    throw ConfigError("unknown experiment '" + cfg.experiment + "'");
}

}  // namespace risklab
