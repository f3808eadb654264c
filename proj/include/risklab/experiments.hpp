#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "risklab/models.hpp"
#include "risklab/risk.hpp"

namespace risklab {

struct FeatureSpec {
    std::string kind = "haar_spectrum";  // or "isotropic"
    std::uint64_t seed = 1;
};

struct Ar1Grid {
    std::vector<double> sigma2;
    std::vector<double> rho2;
};

struct ClusterGrid {
    Eigen::Index n1 = 5;
    Eigen::Index n2 = 15;
    double rho1 = 0.05;
    double rho2 = 0.05;
    std::vector<double> sigma1_2;
    std::vector<double> sigma2_2;
};

struct OffdiagSpec {
    double rho_max = 0.05;
    std::uint64_t rho_seed = 1;
};

struct DescentSpec {
    std::vector<double> gamma;
    std::vector<double> trace_levels;
};

struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 1;
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    double r2 = 1.0;
    double r_sigma2 = 1.0;
    FeatureSpec features;
    McConfig mc;
    std::string output;
    Ar1Grid ar1;
    ClusterGrid cluster;
    OffdiagSpec offdiag;
    DescentSpec descent;
    bool empirical_cov = false;
    unsigned threads = 0;
    std::string inject_fault;  // verify only; empty means none
};

// Parses and validates a JSON config; throws ConfigError with the file and
// field in the message.
ExperimentConfig load_config(const std::string& path);
void validate(const ExperimentConfig& cfg);

// Compact JSON echo of the effective config (for output headers/reports).
std::string config_echo(const ExperimentConfig& cfg);

FeatureModel build_features(const FeatureSpec& spec, Eigen::Index p);

// Sweep runners; each writes cfg.output and returns a process exit code.
int run_ar1_sweep(const ExperimentConfig& cfg);
int run_cluster_sweep(const ExperimentConfig& cfg);
int run_offdiag_study(const ExperimentConfig& cfg);
int run_descent_curve(const ExperimentConfig& cfg);
int run_verify(const ExperimentConfig& cfg);
int run_experiment(const ExperimentConfig& cfg);

// One verification check: observed vs expected within tolerance.
struct VerifyCheck {
    std::string name;
    double observed = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct VerifyReport {
    std::uint64_t seed = 0;
    std::string injected_fault;  // "none" when clean
    std::vector<VerifyCheck> checks;
    bool all_pass = false;
};

// Runs the invariant suite end to end; inject_fault deliberately breaks one
// internal step so the harness can prove it detects failures.
VerifyReport run_verify_checks(std::uint64_t seed, const std::string& inject_fault);

}  // namespace risklab
