#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "cbf/control.hpp"
#include "cbf/dynamics.hpp"
#include "cbf/report.hpp"

namespace cbf {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Fully resolved experiment description. Loaded from a single JSON file;
/// every default is materialized here so output headers are self-describing.
struct ExperimentConfig {
    TorusGrid grid;
    CBFParams params;
    std::uint64_t seed = 0;
    std::string out_dir = "out";

    // model
    int controls = 1;
    double forcing_amplitude = 0.0;  // 0 disables forcing
    double forcing_omega = 0.0;
    double forcing_spectrum_s = 3.0;

    // initial state
    double initial_amplitude = 1.0;
    double initial_spectrum_s = 3.0;
    double initial_cutoff = 1.0 / 3.0;

    // time window
    double t0 = 0.0;
    double T = 0.5;
    double dt = 1e-3;
    std::string scheme = "imex_rk2";

    // cost
    std::string running_cost = "enstrophy";
    std::string terminal_cost = "h2";
    std::vector<double> control_penalty;
    double growth_k = 2.0;

    // command-specific options
    std::string suite = "all";
    int verify_samples = 200;
    int slices = 3;
    std::vector<double> snapshot_times;
    std::vector<double> sweep_mu;
    std::vector<double> sweep_beta;
    std::vector<double> sweep_r;

    ControlModel make_model() const {
        if (forcing_amplitude == 0.0) return ControlModel::zero(grid, controls);
        return ControlModel::seeded(grid, controls, seed, forcing_amplitude, forcing_omega,
                                    forcing_spectrum_s);
    }

    SpectralField make_initial_state() const {
        RandomFieldOptions opts;
        opts.spectrum_s = initial_spectrum_s;
        opts.cutoff_frac = initial_cutoff;
        SpectralField z = random_solenoidal_field(grid, seed, opts);
        if (initial_amplitude == 0.0) return SpectralField(grid);
        double nrm = norm_h(z);
        if (nrm > 0.0) z *= initial_amplitude / nrm;
        return z;
    }

    CostSpec make_cost_spec() const {
        CostSpec spec;
        if (running_cost == "enstrophy")
            spec.running = RunningCost::Enstrophy;
        else if (running_cost == "enstrophy_penalty")
            spec.running = RunningCost::EnstrophyPlusPenalty;
        else
            throw ConfigError("unknown running cost: " + running_cost);
        if (terminal_cost == "h2")
            spec.terminal = TerminalCost::H2;
        else if (terminal_cost == "v2")
            spec.terminal = TerminalCost::V2;
        else
            throw ConfigError("unknown terminal cost: " + terminal_cost);
        spec.control_penalty = control_penalty;
        if (spec.running == RunningCost::EnstrophyPlusPenalty &&
            static_cast<int>(spec.control_penalty.size()) != controls)
            throw ConfigError("control_penalty must list one entry per control");
        spec.growth_k = growth_k;
        return spec;
    }

    /// Resolved configuration, dumped into every output header.
    json resolved() const {
        json j;
        j["grid"] = {{"dim", grid.dim}, {"n", grid.n}, {"pad", grid.pad_factor}};
        j["params"] = {{"mu", params.mu},
                       {"alpha", params.alpha},
                       {"beta", params.beta},
                       {"r", params.r.r},
                       {"convection", params.convection}};
        j["model"] = {{"controls", controls},
                      {"forcing_amplitude", forcing_amplitude},
                      {"forcing_omega", forcing_omega},
                      {"forcing_spectrum_s", forcing_spectrum_s}};
        j["initial"] = {{"amplitude", initial_amplitude},
                    {"spectrum_s", initial_spectrum_s},
                    {"cutoff", initial_cutoff}};
        j["time"] = {{"t", t0}, {"T", T}, {"dt", dt}, {"scheme", scheme}};
        j["cost"] = {{"running", running_cost},
                     {"terminal", terminal_cost},
                     {"penalty", control_penalty},
                     {"growth_k", growth_k}};
        j["seed"] = seed;
        j["out"] = out_dir;
        return j;
    }
};

namespace config_detail {

template <class T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config field '" + key + "': " + e.what());
    }
}

}  // namespace config_detail

inline ExperimentConfig parse_config(const json& j) {
    using config_detail::get_or;
    ExperimentConfig c;
    if (!j.contains("seed")) throw ConfigError("config requires a 'seed' field");
    c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        c.grid.dim = get_or(g, "dim", c.grid.dim);
        c.grid.n = get_or(g, "n", c.grid.n);
        c.grid.pad_factor = get_or(g, "pad", c.grid.pad_factor);
    }
    c.grid.validate();
    if (j.contains("params")) {
        const json& p = j.at("params");
        c.params.mu = get_or(p, "mu", c.params.mu);
        c.params.alpha = get_or(p, "alpha", c.params.alpha);
        c.params.beta = get_or(p, "beta", c.params.beta);
        c.params.r = AbsorptionExponent(get_or(p, "r", c.params.r.r));
        c.params.convection = get_or(p, "convection", c.params.convection);
    }
    c.params.dim = c.grid.dim;
    c.params.validate();
    if (j.contains("model")) {
        const json& m = j.at("model");
        c.controls = get_or(m, "controls", c.controls);
        c.forcing_amplitude = get_or(m, "forcing_amplitude", c.forcing_amplitude);
        c.forcing_omega = get_or(m, "forcing_omega", c.forcing_omega);
        c.forcing_spectrum_s = get_or(m, "forcing_spectrum_s", c.forcing_spectrum_s);
    }
    if (c.controls < 1) throw ConfigError("model.controls must be >= 1");
    if (j.contains("initial")) {
        const json& i = j.at("initial");
        c.initial_amplitude = get_or(i, "amplitude", c.initial_amplitude);
        c.initial_spectrum_s = get_or(i, "spectrum_s", c.initial_spectrum_s);
        c.initial_cutoff = get_or(i, "cutoff", c.initial_cutoff);
    }
    if (j.contains("time")) {
        const json& t = j.at("time");
        c.t0 = get_or(t, "t", c.t0);
        c.T = get_or(t, "T", c.T);
        c.dt = get_or(t, "dt", c.dt);
        c.scheme = get_or(t, "scheme", c.scheme);
    }
    if (!(c.T > c.t0) || !(c.dt > 0.0)) throw ConfigError("time window requires T > t, dt > 0");
    scheme_from_string(c.scheme);  // validates
    if (j.contains("cost")) {
        const json& k = j.at("cost");
        c.running_cost = get_or(k, "running", c.running_cost);
        c.terminal_cost = get_or(k, "terminal", c.terminal_cost);
        c.control_penalty = get_or(k, "penalty", c.control_penalty);
        c.growth_k = get_or(k, "growth_k", c.growth_k);
    }
    if (j.contains("simulate")) {
        const json& s = j.at("simulate");
        c.snapshot_times = get_or(s, "snapshot_times", c.snapshot_times);
    }
    if (j.contains("verify")) {
        const json& v = j.at("verify");
        c.suite = get_or(v, "suite", c.suite);
        c.verify_samples = get_or(v, "samples", c.verify_samples);
    }
    if (j.contains("value")) {
        const json& v = j.at("value");
        c.slices = get_or(v, "slices", c.slices);
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        c.sweep_mu = get_or(s, "mu", c.sweep_mu);
        c.sweep_beta = get_or(s, "beta", c.sweep_beta);
        c.sweep_r = get_or(s, "r", c.sweep_r);
    }
    c.out_dir = get_or(j, "out", c.out_dir);
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return parse_config(j);
}

}  // namespace cbf
