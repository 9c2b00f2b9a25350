// Acceptance suite: every criterion runs at its stated tolerance and prints
// one pass/fail line. Exit 0 iff all criteria pass.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cbf/cbf.hpp"
#include "cbf/oracle.hpp"

using namespace cbf;

namespace {

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<std::string()> run;  // returns "" on pass, reason on fail
};

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

const TorusGrid grid32{2, 32, 2.0};
const TorusGrid grid16{2, 16, 2.0};

CBFParams make_params(double mu, double beta, double r, int dim = 2) {
    CBFParams p;
    p.mu = mu;
    p.beta = beta;
    p.r = AbsorptionExponent(r);
    p.dim = dim;
    return p;
}

// --- criterion 1 -----------------------------------------------------------
std::string criterion_identity_suite() {
    auto reports = check_identity_suite(grid32, make_params(1.0, 0.5, 3.0), 200, 7);
    for (const auto& r : reports)
        if (!r.pass) return r.name + " residual " + fmt(r.residual) + " > " + fmt(r.tolerance);
    return "";
}

// --- criterion 2 -----------------------------------------------------------
std::string criterion_oracle_equivalence() {
    TorusGrid g8{2, 8, 2.0};
    for (int i = 0; i < 5; ++i) {
        SpectralField u = normalized_h(random_solenoidal_field(g8, 70 + i));
        SpectralField v = normalized_h(random_solenoidal_field(g8, 80 + i));
        SpectralField bf = convective_B(u, v);
        SpectralField bo = oracle::convective_B_oracle(u, v);
        double db = norm_h(bf - bo) / std::max(norm_h(bo), 1e-300);
        if (db > 1e-10) return "B oracle mismatch " + fmt(db);
        for (double r : {3.0, 5.0}) {
            SpectralField cf = damping_C(u, r);
            SpectralField co = oracle::damping_C_oracle(u, r);
            double dc = norm_h(cf - co) / std::max(norm_h(co), 1e-300);
            if (dc > 1e-10) return "C oracle mismatch at r=" + fmt(r) + ": " + fmt(dc);
        }
    }
    return "";
}

// --- criterion 3 -----------------------------------------------------------
std::string criterion_inequality_suite() {
    struct Case {
        double mu, beta, r;
    };
    for (Case c : {Case{1.0, 1.0, 4.0}, Case{0.1, 10.0, 5.0}}) {
        auto reports = check_inequality_suite(grid32, make_params(c.mu, c.beta, c.r), 100, 7);
        for (const auto& r : reports) {
            if (r.skipped) return r.name + " unexpectedly skipped";
            if (r.hard && !r.pass)
                return r.name + " at (mu,beta,r)=(" + fmt(c.mu) + "," + fmt(c.beta) + "," +
                       fmt(c.r) + "): excess " + fmt(r.residual);
        }
    }
    return "";
}

// --- criterion 4 -----------------------------------------------------------
std::string criterion_energy_balances() {
    CBFParams p = make_params(0.2, 2.5, 3.0);  // 2 beta mu = 1, stiff part resolved at these dt
    ControlModel model = ControlModel::zero(grid32);
    RandomFieldOptions fo;
    fo.spectrum_s = 5.0;
    fo.cutoff_frac = 0.125;
    SpectralField z0 = normalized_h(random_solenoidal_field(grid32, 7, fo));
    IntegrateOptions opts;
    opts.diag = DiagLevel::Strong;
    opts.keep_states = false;
    std::vector<Trajectory> runs;
    for (double dt : {2e-3, 1e-3, 5e-4}) {
        ControlSignal sig = ControlSignal::constant(0.0, 0.1, 0);
        runs.push_back(integrate(z0, sig, 0.0, 0.1, dt, p, model, opts));
        const Trajectory& t = runs.back();
        for (std::size_t i = 1; i < t.nodes(); ++i)
            if (!(t.diag[i].h2 < t.diag[i - 1].h2))
                return "H norm not strictly decreasing at dt=" + fmt(dt);
    }
    for (const auto& rep : check_balance_convergence(runs, 1.9))
        if (!rep.pass) return rep.name + ": " + rep.note;
    return "";
}

// --- criterion 5 -----------------------------------------------------------
std::string criterion_continuous_dependence() {
    CBFParams p = make_params(1.0, 1.0, 4.0);
    double rho = varrho(p.mu, p.beta, p.r.r);
    if (std::abs(rho - 8.0 / 27.0) > 1e-15) return "varrho != 8/27";
    ControlModel model = ControlModel::seeded(grid32, 1, 7, 0.5);
    ControlSignal sig = ControlSignal::constant(0.0, 0.1, 0);
    std::vector<std::string> failures(100);
    parallel_for(100, [&](std::size_t i) {
        SpectralField z1 = normalized_h(random_solenoidal_field(grid32, 1000 + i));
        SpectralField dz = normalized_h(random_solenoidal_field(grid32, 2000 + i));
        dz *= 1e-4;
        EstimateReport rep =
            check_continuous_dependence(z1, z1 + dz, sig, p, model, 0.0, 0.1, 1e-3);
        if (!rep.pass) failures[i] = "pair " + std::to_string(i) + " excess " + fmt(rep.residual);
    });
    for (const std::string& f : failures)
        if (!f.empty()) return f;
    return "";
}

// --- criterion 6 -----------------------------------------------------------
std::string criterion_linear_exactness() {
    CBFParams p = make_params(1.0, 0.0, 3.0);
    p.convection = false;
    ControlModel model = ControlModel::zero(grid32);
    SpectralField z0 = random_solenoidal_field(grid32, 7);
    double dt = 1e-3;
    ControlSignal sig = ControlSignal::constant(0.0, 100 * dt, 0);
    Trajectory traj = integrate(z0, sig, 0.0, 100 * dt, dt, p, model);
    double worst = 0.0;
    for (std::size_t n = 0; n < traj.nodes(); ++n) {
        double s = traj.times[n];
        for_each_mode(2, grid32.n, [&](std::size_t flat, const std::array<int, 3>& k) {
            double decay = std::exp(-p.mu * stokes_multiplier(k) * s);
            for (int c = 0; c < 2; ++c)
                worst = std::max(worst,
                                 std::abs(traj.states[n].at(c, flat) - decay * z0.at(c, flat)));
        });
    }
    if (worst > 1e-10) return "max modewise error " + fmt(worst);
    return "";
}

// --- criterion 7 -----------------------------------------------------------
std::string criterion_da_balance() {
    TorusGrid g3{3, 16, 2.0};
    CBFParams p = make_params(0.1, 1.0, 5.0, 3);  // Table 2 Case III regime
    ControlModel model = ControlModel::seeded(g3, 1, 7, 0.3);
    RandomFieldOptions fo;
    fo.spectrum_s = 5.0;  // z0 in D(A) with headroom
    fo.cutoff_frac = 0.125;
    SpectralField z0 = normalized_h(random_solenoidal_field(g3, 7, fo));
    z0 *= 0.5;
    IntegrateOptions opts;
    opts.diag = DiagLevel::DomainA;
    opts.keep_states = false;
    std::vector<Trajectory> runs;
    for (double dt : {2e-3, 1e-3, 5e-4}) {
        ControlSignal sig = ControlSignal::constant(0.0, 0.05, 0);
        runs.push_back(integrate(z0, sig, 0.0, 0.05, dt, p, model, opts));
    }
    for (const auto& rep : check_balance_convergence(runs, 1.9))
        if (rep.name == "da_balance_order" && !rep.pass) return rep.name + ": " + rep.note;
    for (const auto& rep : check_energy_estimates(runs.back(), model))
        if (rep.name == "da_integrals_monotone" && !rep.pass)
            return "D(A) integrals not finite/monotone";
    return "";
}

// --- criterion 8 -----------------------------------------------------------
std::string criterion_dpp() {
    CBFParams p = make_params(1.0, 0.5, 3.0);
    ControlModel model = ControlModel::seeded(grid16, 2, 7, 0.5);
    CostSpec spec;
    SpectralField z0 = 0.3 * normalized_h(random_solenoidal_field(grid16, 7));
    ValueTree tree = value_bruteforce(0.0, 0.12, z0, 3, 2e-3, p, model, spec);
    for (int j : {1, 2}) {
        double rt = dpp_residual(tree, j);
        if (rt > 1e-12) return "tree residual " + fmt(rt) + " at slice " + std::to_string(j);
        double rr = dpp_residual_recomputed(tree, j, p, model, spec);
        if (rr > 1e-9) return "recomputed residual " + fmt(rr) + " at slice " + std::to_string(j);
    }
    return "";
}

// --- criterion 9 -----------------------------------------------------------
std::string criterion_value_regularity() {
    CBFParams p = make_params(1.0, 0.5, 3.0);
    ControlModel model = ControlModel::seeded(grid16, 2, 7, 0.5);
    CostSpec spec;
    double T = 0.08, dt = 2e-3;
    const int M = 2;
    SpectralField z0 = 0.3 * normalized_h(random_solenoidal_field(grid16, 7));
    SpectralField dir = normalized_h(random_solenoidal_field(grid16, 8));
    double v0 = value_bruteforce(0.0, T, z0, M, dt, p, model, spec).value();

    // continuity surrogate: 20 magnitudes spanning [1e-5, 1e-2]
    std::vector<double> mags(20), dv(20);
    for (int i = 0; i < 20; ++i)
        mags[i] = 1e-5 * std::pow(1e3, i / 19.0);
    parallel_for(20, [&](std::size_t i) {
        SpectralField dz = dir;
        dz *= mags[i];
        double v = value_bruteforce(0.0, T, z0 + dz, M, dt, p, model, spec).value();
        dv[i] = std::abs(v - v0);
    });
    for (int i = 1; i < 20; ++i)
        if (dv[i] + 1e-15 < dv[i - 1])
            return "dV not nondecreasing between h=" + fmt(mags[i - 1]) + " and h=" + fmt(mags[i]);
    if (!(dv[0] < dv[19] * 1e-1)) return "dV does not shrink toward 0";

    // growth-ratio stability across a 2x state sweep
    auto empirical_c = [&](double scale) {
        double worst = 0.0;
        for (int i = 0; i < 5; ++i) {
            SpectralField z = normalized_h(random_solenoidal_field(grid16, 100 + i));
            z *= scale;
            double v = value_bruteforce(0.0, T, z, M, dt, p, model, spec).value();
            worst = std::max(worst, std::abs(v) / (1.0 + std::pow(norm_v_sq(z), spec.growth_k / 2.0)));
        }
        return worst;
    };
    double c1 = empirical_c(0.3);
    double c2 = empirical_c(0.6);
    double spread = std::max(c1, c2) / std::min(c1, c2);
    if (spread > 10.0) return "growth ratio spread " + fmt(spread) + " > 10";
    return "";
}

// --- criterion 10 ----------------------------------------------------------
std::string criterion_gateaux() {
    const std::vector<double> epsilons{1e-3, 1e-4, 1e-5};
    for (double r : {3.0, 4.0, 5.0}) {
        AbsorptionExponent rexp(r);
        std::vector<double> orders(50);
        parallel_for(50, [&](std::size_t i) {
            SpectralField u = normalized_h(random_solenoidal_field(grid16, 3000 + i));
            SpectralField y = normalized_h(random_solenoidal_field(grid16, 4000 + i));
            SpectralField deriv = gateaux_C(u, y, rexp);
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (double eps : epsilons) {
                SpectralField up = u;
                SpectralField dy = y;
                dy *= eps;
                up += dy;
                SpectralField fd = damping_C(up, rexp) - damping_C(u, rexp);
                fd *= 1.0 / eps;
                double lx = std::log(eps), ly = std::log(norm_h(fd - deriv));
                sx += lx;
                sy += ly;
                sxx += lx * lx;
                sxy += lx * ly;
            }
            double n = epsilons.size();
            orders[i] = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        });
        for (double o : orders)
            if (o < 0.9) return "order " + fmt(o) + " at r=" + fmt(r);
    }
    return "";
}

// --- criterion 11 ----------------------------------------------------------
std::string criterion_determinism() {
    auto render = [&]() {
        std::stringstream ss;
        json header;
        header["seed"] = 7;
        write_reports_jsonl(ss, check_identity_suite(grid32, make_params(1.0, 0.5, 3.0), 20, 7),
                            header);
        write_reports_jsonl(ss,
                            check_inequality_suite(grid32, make_params(1.0, 1.0, 4.0), 20, 7));
        CBFParams p = make_params(1.0, 0.5, 3.0);
        ControlModel model = ControlModel::seeded(grid32, 1, 7, 0.5);
        SpectralField z0 = normalized_h(random_solenoidal_field(grid32, 7));
        ControlSignal sig = ControlSignal::constant(0.0, 0.02, 0);
        Trajectory traj = integrate(z0, sig, 0.0, 0.02, 1e-3, p, model);
        write_trajectory_csv(ss, traj, {"seed = 7"});
        return ss.str();
    };
    std::string a = render();
    std::string b = render();
    if (a != b) return "repeated runs differ";
    if (a.empty()) return "empty report rendering";
    return "";
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "identity suite (n=32, r=3, 200 samples, tol 1e-8)", 60.0, criterion_identity_suite},
        {2, "oracle equivalence (n=8, r in {3,5}, tol 1e-10)", 30.0, criterion_oracle_equivalence},
        {3, "inequality suite (100 samples, (1,1,4) and (0.1,10,5))", 60.0,
         criterion_inequality_suite},
        {4, "energy balances (orders >= 1.9, strict decay)", 120.0, criterion_energy_balances},
        {5, "continuous dependence (r=4, 100 pairs, varrho=8/27)", 180.0,
         criterion_continuous_dependence},
        {6, "linear exactness (100 steps, tol 1e-10)", 60.0, criterion_linear_exactness},
        {7, "D(A) balance (n=16, d=3, r=5)", 120.0, criterion_da_balance},
        {8, "DPP residuals (n=16, K=2, M=3)", 120.0, criterion_dpp},
        {9, "value-function regularity surrogates", 300.0, criterion_value_regularity},
        {10, "Gateaux finite-difference order >= 0.9", 120.0, criterion_gateaux},
        {11, "byte-identical reports per seed", 120.0, criterion_determinism},
    };

    bool all_pass = true;
    for (const Criterion& c : criteria) {
        double start = now_seconds();
        std::string reason;
        try {
            reason = c.run();
        } catch (const std::exception& e) {
            reason = std::string("exception: ") + e.what();
        }
        double elapsed = now_seconds() - start;
        bool in_budget = elapsed <= c.budget_seconds;
        bool pass = reason.empty() && in_budget;
        all_pass = all_pass && pass;
        std::printf("[%s] criterion %2d: %s  (%.1f s / %.0f s)%s%s\n", pass ? "PASS" : "FAIL",
                    c.id, c.name.c_str(), elapsed, c.budget_seconds,
                    reason.empty() ? "" : " -- ", reason.c_str());
        std::fflush(stdout);
    }
    return all_pass ? 0 : 1;
}
