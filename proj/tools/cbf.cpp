// Command-line front end: simulate | verify | value | dpp | sweep.
// Exit codes: 0 success, 1 assertion failure, 2 usage/config error,
// 3 numerical blow-up.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "cbf/cbf.hpp"

namespace fs = std::filesystem;
using namespace cbf;

namespace {

struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;
    std::optional<std::string> suite_override;
    bool quiet = false;
};

ExperimentConfig resolve_config(const CliOptions& cli) {
    ExperimentConfig cfg = load_config(cli.config_path);
    if (cli.seed_override) cfg.seed = *cli.seed_override;
    if (cli.out_override) cfg.out_dir = *cli.out_override;
    if (cli.suite_override) cfg.suite = *cli.suite_override;
    fs::create_directories(cfg.out_dir);
    std::ofstream probe(fs::path(cfg.out_dir) / ".write_probe");
    if (!probe) throw ConfigError("output directory is not writable: " + cfg.out_dir);
    probe.close();
    fs::remove(fs::path(cfg.out_dir) / ".write_probe");
    return cfg;
}

void warn_regime(const ExperimentConfig& cfg, bool quiet) {
    if (quiet) return;
    for (const std::string& w : classify_regime(cfg.params).warnings)
        std::cerr << "warning: " << w << "\n";
}

std::vector<std::string> header_lines(const ExperimentConfig& cfg) {
    std::vector<std::string> lines;
    json j = cfg.resolved();
    for (auto& [key, val] : j.items()) lines.push_back(key + " = " + val.dump());
    return lines;
}

int cmd_simulate(const ExperimentConfig& cfg, bool quiet) {
    ControlModel model = cfg.make_model();
    SpectralField z0 = cfg.make_initial_state();
    ControlSignal sig = ControlSignal::constant(cfg.t0, cfg.T, 0);
    IntegrateOptions opts;
    opts.scheme = scheme_from_string(cfg.scheme);
    opts.diag = DiagLevel::Basic;
    opts.keep_states = !cfg.snapshot_times.empty();

    Trajectory traj = integrate(z0, sig, cfg.t0, cfg.T, cfg.dt, cfg.params, model, opts);

    std::ofstream os(fs::path(cfg.out_dir) / "trajectory.csv");
    write_trajectory_csv(os, traj, header_lines(cfg));
    for (std::size_t i = 0; i < cfg.snapshot_times.size(); ++i) {
        double t = cfg.snapshot_times[i];
        std::size_t idx = static_cast<std::size_t>(std::llround((t - cfg.t0) / cfg.dt));
        if (idx >= traj.nodes())
            throw ConfigError("snapshot time outside the trajectory: " + std::to_string(t));
        write_snapshot((fs::path(cfg.out_dir) / ("snapshot_" + std::to_string(i) + ".fld")).string(),
                       traj.states[idx]);
    }
    if (!quiet) {
        const StepDiagnostics& d = traj.diag.back();
        std::cout << "simulate: " << traj.nodes() - 1 << " steps, final ||Z||_H = "
                  << std::sqrt(d.h2) << ", ||Z||_V = " << std::sqrt(d.h2 + d.grad2) << "\n";
    }
    return 0;
}

int cmd_verify(const ExperimentConfig& cfg, bool quiet) {
    const std::string& suite = cfg.suite;
    bool all = suite == "all";
    if (!all && suite != "identities" && suite != "inequalities" && suite != "energy" &&
        suite != "dependence")
        throw ConfigError("unknown suite: " + suite);
    ControlModel model = cfg.make_model();
    std::vector<EstimateReport> reports;

    if (all || suite == "identities") {
        auto r = check_identity_suite(cfg.grid, cfg.params, cfg.verify_samples, cfg.seed);
        reports.insert(reports.end(), r.begin(), r.end());
    }
    if (all || suite == "inequalities") {
        auto r = check_inequality_suite(cfg.grid, cfg.params, cfg.verify_samples, cfg.seed);
        reports.insert(reports.end(), r.begin(), r.end());
    }
    if (all || suite == "energy") {
        SpectralField z0 = cfg.make_initial_state();
        ControlSignal sig = ControlSignal::constant(cfg.t0, cfg.T, 0);
        IntegrateOptions opts;
        opts.scheme = scheme_from_string(cfg.scheme);
        opts.diag = DiagLevel::Strong;
        opts.keep_states = false;
        std::vector<Trajectory> runs;
        for (double dt : {cfg.dt, 0.5 * cfg.dt})
            runs.push_back(integrate(z0, sig, cfg.t0, cfg.T, dt, cfg.params, model, opts));
        auto per_run = check_energy_estimates(runs.back(), model);
        reports.insert(reports.end(), per_run.begin(), per_run.end());
        auto conv = check_balance_convergence(runs, opts.scheme == Scheme::ImexRk2 ? 1.9 : 0.9);
        reports.insert(reports.end(), conv.begin(), conv.end());
        if (cfg.forcing_amplitude == 0.0) {
            double worst = -1e300;
            for (std::size_t i = 1; i < runs.back().nodes(); ++i)
                worst = std::max(worst, runs.back().diag[i].h2 - runs.back().diag[i - 1].h2);
            reports.push_back(
                EstimateReport::one_sided("h_norm_nonincreasing", worst, 0.0, 0.0));
        } else {
            reports.push_back(
                EstimateReport::skip("h_norm_nonincreasing", "requires zero forcing"));
        }
    }
    if (all || suite == "dependence") {
        const double r = cfg.params.r.r;
        if (r > 3.0 || (r == 3.0 && 2.0 * cfg.params.beta * cfg.params.mu >= 1.0)) {
            SpectralField z1 = cfg.make_initial_state();
            RandomFieldOptions popts;
            SpectralField dz = normalized_h(random_solenoidal_field(cfg.grid, cfg.seed + 77, popts));
            dz *= 1e-4;
            SpectralField z2 = z1 + dz;
            ControlSignal sig = ControlSignal::constant(cfg.t0, cfg.T, 0);
            reports.push_back(check_continuous_dependence(z1, z2, sig, cfg.params, model, cfg.t0,
                                                          cfg.T, cfg.dt,
                                                          scheme_from_string(cfg.scheme)));
        } else {
            reports.push_back(EstimateReport::skip(
                "dependence_envelope", "requires r > 3, or r = 3 with 2 beta mu >= 1"));
        }
    }

    std::ofstream os(fs::path(cfg.out_dir) / "reports.jsonl");
    write_reports_jsonl(os, reports, cfg.resolved());
    if (!quiet) print_report_table(std::cout, reports);
    if (!all_hard_pass(reports)) {
        std::cerr << "failing checks:";
        for (const EstimateReport& r : reports)
            if (r.hard && !r.skipped && !r.pass) std::cerr << " " << r.name;
        std::cerr << "\n";
        return 1;
    }
    return 0;
}

int cmd_value(const ExperimentConfig& cfg, bool quiet, bool with_dpp) {
    ControlModel model = cfg.make_model();
    CostSpec spec = cfg.make_cost_spec();
    SpectralField z0 = cfg.make_initial_state();
    ValueTree tree = value_bruteforce(cfg.t0, cfg.T, z0, cfg.slices, cfg.dt, cfg.params, model,
                                      spec, scheme_from_string(cfg.scheme));
    {
        std::ofstream os(fs::path(cfg.out_dir) / "value_tree.json");
        json j = tree.to_json();
        j["config"] = cfg.resolved();
        os << j.dump(2) << "\n";
    }
    {
        std::ofstream os(fs::path(cfg.out_dir) / "optimal_signal.csv");
        write_signal_csv(os, tree.optimal_signal());
    }
    if (!quiet) std::cout << "value: " << csv_num(tree.value()) << "\n";
    if (!with_dpp) return 0;

    bool ok = true;
    std::ofstream os(fs::path(cfg.out_dir) / "dpp_residuals.csv");
    os << "slice,residual_tree,residual_recomputed\n";
    for (int j = 1; j < tree.M; ++j) {
        double rt = dpp_residual(tree, j);
        double rr = dpp_residual_recomputed(tree, j, cfg.params, model, spec,
                                            scheme_from_string(cfg.scheme));
        os << j << "," << csv_num(rt) << "," << csv_num(rr) << "\n";
        if (!quiet)
            std::cout << "dpp slice " << j << ": tree " << rt << ", recomputed " << rr << "\n";
        ok = ok && rt <= 1e-12 && rr <= 1e-9;
    }
    if (!ok) {
        std::cerr << "dpp residuals exceed tolerance\n";
        return 1;
    }
    return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, bool quiet) {
    auto pick = [](const std::vector<double>& v, double fallback) {
        return v.empty() ? std::vector<double>{fallback} : v;
    };
    std::vector<double> mus = pick(cfg.sweep_mu, cfg.params.mu);
    std::vector<double> betas = pick(cfg.sweep_beta, cfg.params.beta);
    std::vector<double> rs = pick(cfg.sweep_r, cfg.params.r.r);

    struct Row {
        double mu, beta, r;
        bool blowup = false;
        double final_h = 0.0, final_v = 0.0, max_balance = 0.0;
    };
    std::vector<Row> rows;
    for (double mu : mus)
        for (double beta : betas)
            for (double r : rs) rows.push_back({mu, beta, r});

    ControlModel model = cfg.make_model();
    SpectralField z0 = cfg.make_initial_state();
    ControlSignal sig = ControlSignal::constant(cfg.t0, cfg.T, 0);
    bool any_blowup = false;
    parallel_for(rows.size(), [&](std::size_t i) {
        Row& row = rows[i];
        CBFParams p = cfg.params;
        p.mu = row.mu;
        p.beta = row.beta;
        p.r = AbsorptionExponent(row.r);
        IntegrateOptions opts;
        opts.scheme = scheme_from_string(cfg.scheme);
        opts.keep_states = false;
        try {
            Trajectory traj = integrate(z0, sig, cfg.t0, cfg.T, cfg.dt, p, model, opts);
            const StepDiagnostics& d = traj.diag.back();
            row.final_h = std::sqrt(d.h2);
            row.final_v = std::sqrt(d.h2 + d.grad2);
            row.max_balance = BalanceResiduals::max_of(balance_residuals(traj).weak);
        } catch (const BlowupError&) {
            row.blowup = true;
        }
    });
    std::ofstream os(fs::path(cfg.out_dir) / "sweep_summary.csv");
    for (const std::string& line : header_lines(cfg)) os << "# " << line << "\n";
    os << "mu,beta,r,status,final_h_norm,final_v_norm,max_weak_balance\n";
    for (const Row& row : rows) {
        any_blowup = any_blowup || row.blowup;
        os << csv_num(row.mu) << "," << csv_num(row.beta) << "," << csv_num(row.r) << ","
           << (row.blowup ? "blowup" : "ok") << "," << csv_num(row.final_h) << ","
           << csv_num(row.final_v) << "," << csv_num(row.max_balance) << "\n";
    }
    if (!quiet) std::cout << "sweep: " << rows.size() << " runs\n";
    return any_blowup ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Controlled convective Brinkman-Forchheimer workbench"};
    app.require_subcommand(1);

    CliOptions cli;
    std::uint64_t seed_val = 0;
    std::string out_val, suite_val;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", cli.config_path, "experiment config (JSON)")->required();
        sub->add_option("--seed", seed_val, "override the config seed");
        sub->add_option("--out", out_val, "override the output directory");
        sub->add_flag("--quiet", cli.quiet, "suppress progress output");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "integrate one controlled trajectory");
    CLI::App* verify = app.add_subcommand("verify", "run verification suites");
    verify->add_option("--suite", suite_val, "identities|inequalities|energy|dependence|all");
    CLI::App* value = app.add_subcommand("value", "brute-force value function");
    CLI::App* dpp = app.add_subcommand("dpp", "value function plus DPP residual table");
    CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep of simulate");
    for (CLI::App* sub : {simulate, verify, value, dpp, sweep}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    for (CLI::App* sub : {simulate, verify, value, dpp, sweep}) {
        if (!sub->parsed()) continue;
        if (sub->count("--seed")) cli.seed_override = seed_val;
        if (sub->count("--out")) cli.out_override = out_val;
    }
    if (verify->parsed() && verify->count("--suite")) cli.suite_override = suite_val;

    try {
        ExperimentConfig cfg = resolve_config(cli);
        warn_regime(cfg, cli.quiet);
        if (simulate->parsed()) return cmd_simulate(cfg, cli.quiet);
        if (verify->parsed()) return cmd_verify(cfg, cli.quiet);
        if (value->parsed()) return cmd_value(cfg, cli.quiet, false);
        if (dpp->parsed()) return cmd_value(cfg, cli.quiet, true);
        if (sweep->parsed()) return cmd_sweep(cfg, cli.quiet);
    } catch (const BlowupError& e) {
        std::cerr << "blow-up: " << e.what() << "\n";
        return 3;
    } catch (const BudgetError& e) {
        std::cerr << "budget: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
