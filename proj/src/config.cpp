#include <fstream>

#include <nlohmann/json.hpp>

#include "risklab/errors.hpp"
#include "risklab/experiments.hpp"

namespace risklab {

namespace {

using nlohmann::json;

const std::vector<std::string> kExperiments = {
    "ar1_sweep", "cluster_sweep", "descent_curve", "offdiag_study", "verify"};

[[noreturn]] void fail(const std::string& path, const std::string& field,
                       const std::string& why) {
    throw ConfigError(path + ": field '" + field + "' " + why);
}

template <typename T>
T get_or(const json& j, const std::string& path, const std::string& field, T fallback) {
    if (!j.contains(field)) return fallback;
    try {
        return j.at(field).get<T>();
    } catch (const json::exception& e) {
        fail(path, field, std::string("has the wrong type (") + e.what() + ")");
    }
}

template <typename T>
T require(const json& j, const std::string& path, const std::string& field) {
    if (!j.contains(field)) fail(path, field, "is required");
    try {
        return j.at(field).get<T>();
    } catch (const json::exception& e) {
        fail(path, field, std::string("has the wrong type (") + e.what() + ")");
    }
}

std::vector<double> number_list(const json& j, const std::string& path,
                                const std::string& field) {
    auto v = require<std::vector<double>>(j, path, field);
    if (v.empty()) fail(path, field, "must be a non-empty list");
    return v;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open file");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }

    ExperimentConfig cfg;
    cfg.experiment = require<std::string>(j, path, "experiment");
    cfg.seed = get_or<std::uint64_t>(j, path, "seed", 1);
    cfg.n = get_or<Eigen::Index>(j, path, "n", 0);
    cfg.p = get_or<Eigen::Index>(j, path, "p", 0);
    cfg.r2 = get_or<double>(j, path, "r2", 1.0);
    cfg.r_sigma2 = get_or<double>(j, path, "r_sigma2", 1.0);
    cfg.output = get_or<std::string>(j, path, "output", "");
    cfg.empirical_cov = get_or<bool>(j, path, "empirical_cov", false);
    cfg.threads = get_or<unsigned>(j, path, "threads", 0);

    if (j.contains("features")) {
        const json& f = j.at("features");
        cfg.features.kind = get_or<std::string>(f, path, "kind", "haar_spectrum");
        cfg.features.seed = get_or<std::uint64_t>(f, path, "seed", 1);
    }
    if (j.contains("mc")) {
        const json& m = j.at("mc");
        cfg.mc.n_x = get_or<long>(m, path, "n_x", cfg.mc.n_x);
        cfg.mc.n_eps = get_or<long>(m, path, "n_eps", cfg.mc.n_eps);
        cfg.mc.n_beta = get_or<long>(m, path, "n_beta", cfg.mc.n_beta);
    }
    cfg.mc.seed = cfg.seed;

    if (j.contains("ar1")) {
        const json& a = j.at("ar1");
        cfg.ar1.sigma2 = number_list(a, path, "sigma2");
        cfg.ar1.rho2 = number_list(a, path, "rho2");
    }
    if (j.contains("cluster")) {
        const json& c = j.at("cluster");
        cfg.cluster.n1 = require<Eigen::Index>(c, path, "n1");
        cfg.cluster.n2 = require<Eigen::Index>(c, path, "n2");
        cfg.cluster.rho1 = get_or<double>(c, path, "rho1", 0.05);
        cfg.cluster.rho2 = get_or<double>(c, path, "rho2", 0.05);
        cfg.cluster.sigma1_2 = number_list(c, path, "sigma1_2");
        cfg.cluster.sigma2_2 = number_list(c, path, "sigma2_2");
    }
    if (j.contains("offdiag")) {
        const json& o = j.at("offdiag");
        cfg.offdiag.rho_max = get_or<double>(o, path, "rho_max", 0.05);
        cfg.offdiag.rho_seed = get_or<std::uint64_t>(o, path, "rho_seed", 1);
    }
    if (j.contains("descent")) {
        const json& d = j.at("descent");
        cfg.descent.gamma = number_list(d, path, "gamma");
        cfg.descent.trace_levels = number_list(d, path, "trace_levels");
    }

    try {
        validate(cfg);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return cfg;
}

void validate(const ExperimentConfig& cfg) {
    const std::string& path = cfg.experiment;
    bool known = false;
    for (const auto& e : kExperiments) known = known || e == cfg.experiment;
    if (!known) throw ConfigError("unknown experiment '" + cfg.experiment + "'");

    if (cfg.experiment == "verify") return;

    validate(cfg.mc);
    if (cfg.features.kind != "haar_spectrum" && cfg.features.kind != "isotropic")
        throw ConfigError("features.kind must be 'haar_spectrum' or 'isotropic', got '" +
                          cfg.features.kind + "'");

    if (cfg.experiment == "ar1_sweep") {
        if (cfg.n < 1 || cfg.p < 1) throw ConfigError(path + ": n and p must be >= 1");
        if (cfg.p < cfg.n)
            throw ConfigError(path + ": p must be >= n (full row rank designs)");
        if (cfg.ar1.sigma2.empty() || cfg.ar1.rho2.empty())
            throw ConfigError(path + ": 'ar1' grid with sigma2 and rho2 lists is required");
        for (double s : cfg.ar1.sigma2)
            if (s <= 0.0) throw ConfigError(path + ": ar1.sigma2 entries must be > 0");
        for (double r : cfg.ar1.rho2)
            if (r < 0.0 || r >= 1.0)
                throw ConfigError(path + ": ar1.rho2 entries must lie in [0, 1)");
    } else if (cfg.experiment == "cluster_sweep" || cfg.experiment == "offdiag_study") {
        if (cfg.cluster.n1 < 1 || cfg.cluster.n2 < 1)
            throw ConfigError(path + ": cluster.n1 and cluster.n2 must be >= 1");
        if (cfg.p < 1) throw ConfigError(path + ": p must be >= 1");
        if (cfg.n != 0 && cfg.n != cfg.cluster.n1 + cfg.cluster.n2)
            throw ConfigError(path + ": n does not equal cluster.n1 + cluster.n2");
        if (cfg.p < cfg.cluster.n1 + cfg.cluster.n2)
            throw ConfigError(path + ": p must be >= n1 + n2 (full row rank designs)");
        if (cfg.cluster.sigma1_2.empty() || cfg.cluster.sigma2_2.empty())
            throw ConfigError(path + ": 'cluster' grid with sigma1_2 and sigma2_2 is required");
        for (double s : cfg.cluster.sigma1_2)
            if (s <= 0.0) throw ConfigError(path + ": cluster.sigma1_2 entries must be > 0");
        for (double s : cfg.cluster.sigma2_2)
            if (s <= 0.0) throw ConfigError(path + ": cluster.sigma2_2 entries must be > 0");
        if (cfg.experiment == "offdiag_study" && cfg.offdiag.rho_max < 0.0)
            throw ConfigError(path + ": offdiag.rho_max must be >= 0");
    } else if (cfg.experiment == "descent_curve") {
        if (cfg.n < 1) throw ConfigError(path + ": n must be >= 1");
        if (cfg.descent.gamma.empty() || cfg.descent.trace_levels.empty())
            throw ConfigError(path + ": 'descent' with gamma and trace_levels is required");
        for (double g : cfg.descent.gamma)
            if (g <= 1.0)
                throw ConfigError(path + ": descent.gamma entries must be > 1");
        for (double t : cfg.descent.trace_levels)
            if (t <= 0.0) throw ConfigError(path + ": descent.trace_levels must be > 0");
    }
}

std::string config_echo(const ExperimentConfig& cfg) {
    json j;
    j["experiment"] = cfg.experiment;
    j["seed"] = cfg.seed;
    if (cfg.experiment == "verify") {
        if (!cfg.inject_fault.empty()) j["inject_fault"] = cfg.inject_fault;
        return j.dump();
    }
    j["n"] = cfg.n;
    j["p"] = cfg.p;
    j["r2"] = cfg.r2;
    j["r_sigma2"] = cfg.r_sigma2;
    j["features"] = {{"kind", cfg.features.kind}, {"seed", cfg.features.seed}};
    j["mc"] = {{"n_x", cfg.mc.n_x}, {"n_eps", cfg.mc.n_eps}, {"n_beta", cfg.mc.n_beta}};
    j["empirical_cov"] = cfg.empirical_cov;
    if (cfg.experiment == "ar1_sweep")
        j["ar1"] = {{"sigma2", cfg.ar1.sigma2}, {"rho2", cfg.ar1.rho2}};
    if (cfg.experiment == "cluster_sweep" || cfg.experiment == "offdiag_study")
        j["cluster"] = {{"n1", cfg.cluster.n1},
                        {"n2", cfg.cluster.n2},
                        {"rho1", cfg.cluster.rho1},
                        {"rho2", cfg.cluster.rho2},
                        {"sigma1_2", cfg.cluster.sigma1_2},
                        {"sigma2_2", cfg.cluster.sigma2_2}};
    if (cfg.experiment == "offdiag_study")
        j["offdiag"] = {{"rho_max", cfg.offdiag.rho_max}, {"rho_seed", cfg.offdiag.rho_seed}};
    if (cfg.experiment == "descent_curve")
        j["descent"] = {{"gamma", cfg.descent.gamma},
                        {"trace_levels", cfg.descent.trace_levels}};
    return j.dump();
}

}  // namespace risklab
