#include <catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace cbf;
using cbf::testing::make_field;
using cbf::testing::rel_diff;
using cbf::testing::rel_field_diff;

namespace {
const TorusGrid grid16{2, 16, 2.0};
const TorusGrid grid32{2, 32, 2.0};

CBFParams desk_params(double mu = 1.0, double beta = 0.5, double r = 3.0) {
    CBFParams p;
    p.mu = mu;
    p.beta = beta;
    p.r = AbsorptionExponent(r);
    return p;
}
}  // namespace

TEST_CASE("cost of the zero trajectory vanishes") {
    CBFParams p = desk_params();
    ControlModel model = ControlModel::zero(grid16);
    SpectralField z(grid16);
    z.solenoidal = true;
    ControlSignal sig = ControlSignal::constant(0.0, 0.1, 0);
    Trajectory traj = integrate(z, sig, 0.0, 0.1, 1e-3, p, model);
    CostSpec spec;
    REQUIRE(cost_eval(traj, sig, spec) == 0.0);

    ControlSignal other = ControlSignal::constant(0.0, 0.2, 0);
    REQUIRE_THROWS_AS(cost_eval(traj, other, spec), std::invalid_argument);
}

TEST_CASE("cost of linear single-mode decay matches the closed-form integral") {
    // Z(s) = e^{-mu 4 pi^2 s} z0 for one mode; enstrophy 4 pi^2 e^{-2 mu 4 pi^2 s} ||z0||_H^2
    CBFParams p = desk_params(0.5, 0.0, 3.0);
    p.convection = false;
    ControlModel model = ControlModel::zero(grid16);
    SpectralField z0 = make_field(grid16, [](std::array<double, 3> x) {
        return std::array<double, 3>{std::sin(two_pi * x[1]), 0.0, 0.0};
    });
    double T = 0.05, dt = 1e-5;  // trapezoid error ~ dt^2 must clear 1e-8
    ControlSignal sig = ControlSignal::constant(0.0, T, 0);
    Trajectory traj = integrate(z0, sig, 0.0, T, dt, p, model);
    CostSpec spec;
    double got = cost_eval(traj, sig, spec);

    double lambda = p.mu * two_pi * two_pi;  // mu 4 pi^2 |k|^2, |k| = 1
    double h2 = norm_h_sq(z0);
    double enstrophy_integral = two_pi * two_pi * h2 * (1.0 - std::exp(-2.0 * lambda * T)) /
                                (2.0 * lambda);
    double terminal = h2 * std::exp(-2.0 * lambda * T);
    REQUIRE(std::abs(got - (enstrophy_integral + terminal)) <= 1e-8);
}

TEST_CASE("cost is exactly additive across a split at eta") {
    CBFParams p = desk_params();
    ControlModel model = ControlModel::seeded(grid16, 2, 7, 0.5);
    SpectralField z0 = normalized_h(random_solenoidal_field(grid16, 8));
    double T = 0.1, eta = 0.06, dt = 1e-3;
    ControlSignal sig{{0.0, eta, T}, {1, 0}};
    Trajectory full = integrate(z0, sig, 0.0, T, dt, p, model);

    CostSpec spec;
    spec.running = RunningCost::EnstrophyPlusPenalty;
    spec.control_penalty = {0.3, 0.8};
    double whole = cost_eval(full, sig, spec);

    std::size_t cut = static_cast<std::size_t>(std::llround(eta / dt));
    ControlSignal sig1{{0.0, eta}, {1}};
    ControlSignal sig2{{eta, T}, {0}};
    Trajectory head = integrate(z0, sig1, 0.0, eta, dt, p, model);
    Trajectory tail = integrate(full.states[cut], sig2, eta, T, dt, p, model);

    // strip g from the head part: evaluate its running integral only
    CostSpec run_only = spec;
    run_only.custom_terminal = [](const SpectralField&) { return 0.0; };
    run_only.terminal = TerminalCost::Custom;
    double split = cost_eval(head, sig1, run_only) + cost_eval(tail, sig2, spec);
    REQUIRE(std::abs(whole - split) <= 1e-12 * std::max(1.0, std::abs(whole)));
}

TEST_CASE("running and terminal costs obey the polynomial growth bound on samples") {
    CostSpec spec;  // enstrophy + H^2 terminal, growth exponent 2
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        SpectralField z = random_solenoidal_field(grid16, 600 + i);
        z *= (i % 5 + 1) * 0.5;
        double bound = 1.0 + std::pow(norm_v_sq(z), spec.growth_k / 2.0);
        worst = std::max(worst, std::abs(spec.running_cost(z, 0)) / bound);
        worst = std::max(worst, std::abs(spec.terminal_cost(z)) / bound);
    }
    // enstrophy and ||.||_H^2 are dominated by ||.||_V^2 with constant 1
    REQUIRE(worst <= 1.0 + 1e-12);
}

TEST_CASE("hamiltonian minimizes over the control set") {
    CBFParams p = desk_params();
    (void)p;
    ControlModel model = ControlModel::seeded(grid16, 3, 17, 1.0);
    CostSpec spec;
    spec.running = RunningCost::EnstrophyPlusPenalty;
    spec.control_penalty = {0.5, 0.0, 1.5};
    SpectralField z = normalized_h(random_solenoidal_field(grid16, 18));

    SECTION("p = 0 with a-independent L picks the first control") {
        CostSpec plain;  // pure enstrophy, no control dependence
        SpectralField zero(grid16);
        auto [value, argmin] = hamiltonian(0.0, z, zero, model, plain);
        REQUIRE(argmin == 0);
        REQUIRE(value == Catch::Approx(grad_norm_sq(z)));
    }
    SECTION("sign flip of p flips the argmin for opposite forcings") {
        ControlModel pm;
        pm.grid = grid16;
        pm.labels = {"plus", "minus"};
        auto base = std::make_shared<SpectralField>(normalized_h(random_solenoidal_field(grid16, 19)));
        pm.forcing = [base](double, int a) {
            SpectralField f = *base;
            if (a == 1) f *= -1.0;
            return f;
        };
        SpectralField dir = *base;
        CostSpec plain;
        auto [v1, a1] = hamiltonian(0.0, z, dir, pm, plain);
        SpectralField neg = dir;
        neg *= -1.0;
        auto [v2, a2] = hamiltonian(0.0, z, neg, pm, plain);
        REQUIRE(a1 != a2);
        REQUIRE(v1 == Catch::Approx(v2));
    }
    SECTION("concavity in p: F(lambda p + (1-lambda) q) >= lambda F(p) + (1-lambda) F(q)") {
        Rng rng(23);
        for (int i = 0; i < 100; ++i) {
            SpectralField pa = random_solenoidal_field(grid16, 100 + i);
            SpectralField qa = random_solenoidal_field(grid16, 200 + i);
            double lam = rng.uniform();
            SpectralField mix = pa;
            mix *= lam;
            SpectralField q2 = qa;
            q2 *= (1.0 - lam);
            mix += q2;
            double fm = hamiltonian(0.0, z, mix, model, spec).first;
            double fp = hamiltonian(0.0, z, pa, model, spec).first;
            double fq = hamiltonian(0.0, z, qa, model, spec).first;
            REQUIRE(fm >= lam * fp + (1.0 - lam) * fq - 1e-10);
        }
    }
    SECTION("empty control set is rejected") {
        ControlModel empty;
        empty.grid = grid16;
        SpectralField zero(grid16);
        REQUIRE_THROWS_AS(hamiltonian(0.0, z, zero, empty, spec), std::invalid_argument);
    }
}

TEST_CASE("value with one control equals the cost of the unique signal") {
    CBFParams p = desk_params();
    ControlModel model = ControlModel::seeded(grid16, 1, 27, 0.5);
    CostSpec spec;
    SpectralField z0 = 0.3 * normalized_h(random_solenoidal_field(grid16, 28));
    double T = 0.06, dt = 2e-3;
    ValueTree tree = value_bruteforce(0.0, T, z0, 1, dt, p, model, spec);
    ControlSignal sig = ControlSignal::constant(0.0, T, 0);
    Trajectory traj = integrate(z0, sig, 0.0, T, dt, p, model);
    REQUIRE(rel_diff(tree.value(), cost_eval(traj, sig, spec)) < 1e-12);
}

TEST_CASE("value with M=2, K=2 equals the minimum over the four signals") {
    CBFParams p = desk_params();
    ControlModel model = ControlModel::seeded(grid16, 2, 29, 0.8);
    CostSpec spec;
    spec.running = RunningCost::EnstrophyPlusPenalty;
    spec.control_penalty = {0.0, 0.02};
    SpectralField z0 = 0.3 * normalized_h(random_solenoidal_field(grid16, 30));
    double T = 0.08, dt = 2e-3;
    ValueTree tree = value_bruteforce(0.0, T, z0, 2, dt, p, model, spec);

    double best = 1e300;
    for (int a0 = 0; a0 < 2; ++a0)
        for (int a1 = 0; a1 < 2; ++a1) {
            ControlSignal sig{{0.0, T / 2, T}, {a0, a1}};
            Trajectory traj = integrate(z0, sig, 0.0, T, dt, p, model);
            best = std::min(best, cost_eval(traj, sig, spec));
        }
    REQUIRE(rel_diff(tree.value(), best) < 1e-12);

    // the reported optimal signal achieves the value
    ControlSignal opt = tree.optimal_signal();
    Trajectory traj = integrate(z0, opt, 0.0, T, dt, p, model);
    REQUIRE(rel_diff(cost_eval(traj, opt, spec), tree.value()) < 1e-12);
}

TEST_CASE("value decreases when the control set grows") {
    CBFParams p = desk_params();
    ControlModel big = ControlModel::seeded(grid16, 3, 33, 0.8);
    ControlModel small;  // first two controls of big
    small.grid = grid16;
    small.labels = {big.labels[0], big.labels[1]};
    small.forcing = big.forcing;
    CostSpec spec;
    SpectralField z0 = 0.3 * normalized_h(random_solenoidal_field(grid16, 34));
    double T = 0.06, dt = 2e-3;
    double v_small = value_bruteforce(0.0, T, z0, 2, dt, p, small, spec).value();
    double v_big = value_bruteforce(0.0, T, z0, 2, dt, p, big, spec).value();
    REQUIRE(v_big <= v_small + 1e-14);
}

TEST_CASE("budget guard rejects K^M over 10^4") {
    CBFParams p = desk_params();
    ControlModel model = ControlModel::zero(grid16, 3);
    CostSpec spec;
    SpectralField z0(grid16);
    z0.solenoidal = true;
    REQUIRE_THROWS_AS(value_bruteforce(0.0, 0.9, z0, 9, 1e-2, p, model, spec), BudgetError);
}

TEST_CASE("DPP residual on the shared tree is machine-level at every interior slice") {
    CBFParams p = desk_params();
    ControlModel model = ControlModel::seeded(grid16, 2, 37, 0.8);
    CostSpec spec;
    SpectralField z0 = 0.3 * normalized_h(random_solenoidal_field(grid16, 38));
    ValueTree tree = value_bruteforce(0.0, 0.12, z0, 3, 2e-3, p, model, spec);
    REQUIRE(dpp_residual(tree, 1) <= 1e-12);
    REQUIRE(dpp_residual(tree, 2) <= 1e-12);
    SECTION("no interior slice on an M=1 tree") {
        ValueTree flat = value_bruteforce(0.0, 0.12, z0, 1, 2e-3, p, model, spec);
        REQUIRE_THROWS_AS(dpp_residual(flat, 1), std::out_of_range);
    }
    SECTION("recomputation without the cache stays within 1e-9") {
        REQUIRE(dpp_residual_recomputed(tree, 1, p, model, spec) <= 1e-9);
        REQUIRE(dpp_residual_recomputed(tree, 2, p, model, spec) <= 1e-9);
    }
}

TEST_CASE("vnorm gradient is 2 (A + I) z") {
    SECTION("zero field") {
        REQUIRE(norm_h(vnorm_gradient(SpectralField(grid16))) == 0.0);
    }
    SECTION("single mode multiplier") {
        SpectralField z = make_field(grid16, [](std::array<double, 3> x) {
            return std::array<double, 3>{std::sin(two_pi * x[1]), 0.0, 0.0};
        });
        SpectralField expect = z;
        expect *= 2.0 * (1.0 + two_pi * two_pi);
        REQUIRE(rel_field_diff(vnorm_gradient(z), expect) < 1e-13);
    }
    SECTION("finite differences of ||z||_V^2 over 50 random pairs") {
        double eps = 1e-6;
        for (int i = 0; i < 50; ++i) {
            SpectralField z = normalized_h(random_solenoidal_field(grid16, 300 + i));
            SpectralField y = normalized_h(random_solenoidal_field(grid16, 400 + i));
            SpectralField zp = z, zm = z;
            SpectralField dy = y;
            dy *= eps;
            zp += dy;
            zm -= dy;
            double fd = (norm_v_sq(zp) - norm_v_sq(zm)) / (2.0 * eps);
            double an = inner_h(vnorm_gradient(z), y);
            REQUIRE(rel_diff(fd, an) < 1e-5);
        }
    }
}

TEST_CASE("test functions validate their evaluators") {
    SpectralField y1 = normalized_h(random_solenoidal_field(grid16, 55));
    TestFunction tf = quadratic_test_function({{0.1, 0.2}}, {{1.0, -0.5}}, y1, {{0.3}}, {{0.05}});
    SpectralField z = normalized_h(random_solenoidal_field(grid16, 56));
    REQUIRE(tf.validate(0.4, 1.0, z));
    SECTION("nonpositive delta fails validation") {
        TestFunction bad =
            quadratic_test_function({{0.0}}, {{0.0}}, SpectralField(), {{0.0}}, {{-1.0}});
        REQUIRE_FALSE(bad.validate(0.4, 1.0, z));
    }
}

TEST_CASE("supersolution expression at the origin reduces to min_a L(0,a)") {
    CBFParams p = desk_params();
    ControlModel model = ControlModel::seeded(grid16, 2, 57, 0.7);
    CostSpec spec;
    spec.running = RunningCost::EnstrophyPlusPenalty;
    spec.control_penalty = {0.9, 0.4};
    SpectralField z(grid16);
    z.solenoidal = true;
    TestFunction psi =
        quadratic_test_function({{0.0}}, {{0.0}}, SpectralField(), {{0.0}}, {{0.05}});
    double res = supersolution_residual(0.3, z, psi, p, model, spec);
    // phi = 0 and D psi(0) = 0: everything drops except F(t, 0, 0) = min_a c(a)
    REQUIRE(res == Catch::Approx(0.4));
}

TEST_CASE("negating the test function swaps the super and subsolution expressions") {
    CBFParams p = desk_params();
    ControlModel model = ControlModel::seeded(grid16, 2, 58, 0.7);
    CostSpec spec;
    SpectralField y1 = normalized_h(random_solenoidal_field(grid16, 59));
    SpectralField z = 0.5 * normalized_h(random_solenoidal_field(grid16, 60));
    z.solenoidal = true;
    TestFunction psi = quadratic_test_function({{0.2}}, {{0.7}}, y1, {{0.1}}, {{0.03}});
    TestFunction neg = psi;
    neg.phi = [psi](double t, const SpectralField& w) { return -psi.phi(t, w); };
    neg.phi_t = [psi](double t, const SpectralField& w) { return -psi.phi_t(t, w); };
    neg.phi_grad = [psi](double t, const SpectralField& w) {
        SpectralField g = psi.phi_grad(t, w);
        g *= -1.0;
        return g;
    };
    neg.delta = [psi](double t) { return -psi.delta(t); };
    neg.delta_t = [psi](double t) { return -psi.delta_t(t); };
    double sup_of_neg = supersolution_residual(0.3, z, neg, p, model, spec);
    double sub_of_psi = subsolution_residual(0.3, z, psi, p, model, spec);
    REQUIRE(sup_of_neg == Catch::Approx(sub_of_psi).margin(1e-12));
}

TEST_CASE("HJB residual along the brute-force optimum stays within tolerance") {
    // diagnostic at the spec's scale: n = 16, M = 3, K = 2
    CBFParams p = desk_params();
    ControlModel model = ControlModel::seeded(grid16, 2, 61, 0.1);
    CostSpec spec;
    SpectralField z0 = 0.05 * normalized_h(random_solenoidal_field(grid16, 62));
    ValueTree tree = value_bruteforce(0.0, 0.12, z0, 3, 2e-3, p, model, spec);
    auto residuals = hjb_residual_along_optimal(tree, p, model, spec);
    REQUIRE(residuals.size() == 2);
    for (double r : residuals) {
        INFO("hjb residual " << r);
        REQUIRE(r <= 1e-2);
    }
}

TEST_CASE("value tree exports to JSON with the recursion intact") {
    CBFParams p = desk_params();
    ControlModel model = ControlModel::seeded(grid16, 2, 63, 0.5);
    CostSpec spec;
    SpectralField z0 = 0.3 * normalized_h(random_solenoidal_field(grid16, 64));
    ValueTree tree = value_bruteforce(0.0, 0.08, z0, 2, 2e-3, p, model, spec);
    json j = tree.to_json();
    REQUIRE(j.at("slices").get<int>() == 2);
    REQUIRE(j.at("nodes").size() == 7);  // 1 + 2 + 4
    REQUIRE(j.at("value").get<double>() == tree.value());
}
