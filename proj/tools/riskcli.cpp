#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "risklab/errors.hpp"
#include "risklab/experiments.hpp"
#include "risklab/version.hpp"

namespace {

struct CliOverrides {
    std::string config_path;
    std::string out;
    std::string inject_fault;
    std::uint64_t seed = 0;
    long n_x = 0;
    long n_eps = 0;
    unsigned threads = 0;
    bool has_seed = false;
    bool has_n_x = false;
    bool has_n_eps = false;
    bool has_threads = false;
    bool empirical_cov = false;
};

void add_common_options(CLI::App* sub, CliOverrides& o) {
    sub->add_option("--config", o.config_path, "JSON config file")->required();
    sub->add_option("--seed", o.seed, "override the config seed")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--out", o.out, "override the output path");
    sub->add_option("--n-x", o.n_x, "override the design replicate count")
        ->check(CLI::PositiveNumber);
    sub->add_option("--n-eps", o.n_eps, "override the noise replicate count")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--empirical-cov", o.empirical_cov,
                  "estimate variances from empirical coefficient covariances");
    sub->add_option("--threads", o.threads, "worker thread count (0 = hardware)");
}

int run(const std::string& experiment, const CLI::App* sub, const CliOverrides& o) {
    risklab::ExperimentConfig cfg = risklab::load_config(o.config_path);
    if (cfg.experiment != experiment)
        throw risklab::ConfigError(o.config_path + ": config experiment '" + cfg.experiment +
                                   "' does not match subcommand '" + experiment + "'");
    if (sub->count("--seed") > 0) {
        cfg.seed = o.seed;
        cfg.mc.seed = o.seed;
    }
    if (sub->count("--out") > 0) cfg.output = o.out;
    if (sub->count("--n-x") > 0) cfg.mc.n_x = o.n_x;
    if (sub->count("--n-eps") > 0) cfg.mc.n_eps = o.n_eps;
    if (sub->count("--threads") > 0) cfg.threads = o.threads;
    if (o.empirical_cov) cfg.empirical_cov = true;
    if (!o.inject_fault.empty()) cfg.inject_fault = o.inject_fault;
    return risklab::run_experiment(cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for ridgeless regression risk under "
                 "correlated errors"};
    app.set_version_flag("--version", std::string("riskcli ") + risklab::kVersion);
    app.require_subcommand(1);

    const char* experiments[] = {"ar1_sweep", "cluster_sweep", "offdiag_study",
                                 "descent_curve", "verify"};
    const char* descriptions[] = {
        "risk grid over AR(1) noise parameters",
        "risk grid over two-cluster noise variance pairs",
        "cluster grid with randomly drawn within-cluster correlations",
        "variance curve across aspect ratios and noise levels",
        "run the internal invariant checks and write a JSON report"};
    CliOverrides overrides;
    for (int i = 0; i < 5; ++i) {
        CLI::App* sub = app.add_subcommand(experiments[i], descriptions[i]);
        add_common_options(sub, overrides);
        if (std::string(experiments[i]) == "verify")
            sub->add_option("--inject-fault", overrides.inject_fault,
                            "deliberately break one check to prove detection works");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        const CLI::App* sub = app.get_subcommands().front();
        return run(sub->get_name(), sub, overrides);
    } catch (const risklab::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
