#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbf/dynamics.hpp"
#include "cbf/parallel.hpp"
#include "cbf/report.hpp"

namespace cbf {

// ---------------------------------------------------------------------------
// cost specification
// ---------------------------------------------------------------------------

enum class RunningCost { Enstrophy, EnstrophyPlusPenalty, Custom };
enum class TerminalCost { H2, V2, Custom };

/// Running cost L(z,a) and terminal cost g(z). L is time independent on
/// V x U; the default running cost is the enstrophy ||grad z||_H^2.
struct CostSpec {
    RunningCost running = RunningCost::Enstrophy;
    TerminalCost terminal = TerminalCost::H2;
    std::vector<double> control_penalty;  // c(a), used by EnstrophyPlusPenalty
    double growth_k = 2.0;                // exponent in |L|,|g| <= C (1 + ||z||_V^k)
    std::function<double(const SpectralField&, int)> custom_running;
    std::function<double(const SpectralField&)> custom_terminal;

    double running_cost(const SpectralField& z, int a) const {
        switch (running) {
            case RunningCost::Enstrophy:
                return grad_norm_sq(z);
            case RunningCost::EnstrophyPlusPenalty:
                return grad_norm_sq(z) + penalty(a);
            case RunningCost::Custom:
                if (!custom_running) throw std::invalid_argument("CostSpec: custom L unset");
                return custom_running(z, a);
        }
        return 0.0;
    }

    /// Control-only part of L; integrates exactly over constant intervals.
    double penalty(int a) const {
        if (running != RunningCost::EnstrophyPlusPenalty) return 0.0;
        if (a < 0 || a >= static_cast<int>(control_penalty.size()))
            throw std::out_of_range("CostSpec: penalty index");
        return control_penalty[a];
    }

    /// State-only part of L (running_cost minus penalty).
    double state_cost(const SpectralField& z) const {
        switch (running) {
            case RunningCost::Enstrophy:
            case RunningCost::EnstrophyPlusPenalty:
                return grad_norm_sq(z);
            case RunningCost::Custom:
                throw std::invalid_argument("CostSpec: custom L has no state/penalty split");
        }
        return 0.0;
    }

    double terminal_cost(const SpectralField& z) const {
        switch (terminal) {
            case TerminalCost::H2:
                return norm_h_sq(z);
            case TerminalCost::V2:
                return norm_v_sq(z);
            case TerminalCost::Custom:
                if (!custom_terminal) throw std::invalid_argument("CostSpec: custom g unset");
                return custom_terminal(z);
        }
        return 0.0;
    }
};

// ---------------------------------------------------------------------------
// cost functional and Hamiltonian
// ---------------------------------------------------------------------------

/// J(t,z;a) = int_t^T L(Z(s), a(s)) ds + g(Z(T)), with the state integral by
/// the integrator's trapezoid quadrature (exactly additive across subdivisions)
/// and the control penalty integrated exactly per interval.
inline double cost_eval(const Trajectory& traj, const ControlSignal& signal,
                        const CostSpec& spec) {
    if (traj.nodes() < 2) throw std::invalid_argument("cost_eval: empty trajectory");
    if (traj.states.size() != traj.nodes())
        throw std::invalid_argument("cost_eval: trajectory must keep states");
    if (std::abs(traj.times.front() - signal.breakpoints.front()) > 1e-12 ||
        std::abs(traj.times.back() - signal.breakpoints.back()) > 1e-12)
        throw std::invalid_argument("cost_eval: signal span does not match the trajectory");
    double run = 0.0;
    for (std::size_t i = 0; i + 1 < traj.nodes(); ++i) {
        double h = traj.times[i + 1] - traj.times[i];
        run += 0.5 * h * (spec.state_cost(traj.states[i]) + spec.state_cost(traj.states[i + 1]));
    }
    for (std::size_t i = 0; i + 1 < signal.breakpoints.size(); ++i)
        run += spec.penalty(signal.labels[i]) * (signal.breakpoints[i + 1] - signal.breakpoints[i]);
    return run + spec.terminal_cost(traj.states.back());
}

/// F(t,z,p) = min_a { (f(t,a), p)_H + L(z,a) }; ties break to the lowest
/// control index.
inline std::pair<double, int> hamiltonian(double t, const SpectralField& z,
                                          const SpectralField& p, const ControlModel& model,
                                          const CostSpec& spec) {
    if (model.num_controls() == 0) throw std::invalid_argument("hamiltonian: empty control set");
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int a = 0; a < model.num_controls(); ++a) {
        double val = inner_h(model.force(t, a), p) + spec.running_cost(z, a);
        if (val < best) {
            best = val;
            arg = a;
        }
    }
    return {best, arg};
}

// ---------------------------------------------------------------------------
// brute-force value function
// ---------------------------------------------------------------------------

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValueNode {
    int slice = 0;                 // time-slice index of the node (0 = root)
    int parent = -1;
    int label_from_parent = -1;
    double prefix_cost = 0.0;      // accumulated running cost from the root
    double cost_to_go = 0.0;
    int best_label = -1;
    SpectralField state;
    std::vector<int> children;     // indexed by control label
};

/// Exhaustive evaluation tree over piecewise-constant controls on M uniform
/// slices. cost_to_go realizes the Bellman recursion exactly, so the DPP
/// residual on the shared tree is pure floating-point noise.
struct ValueTree {
    double t0 = 0.0, T = 0.0, dt = 0.0;
    int M = 0, K = 0;
    std::vector<ValueNode> nodes;  // node 0 is the root

    double value() const { return nodes.at(0).cost_to_go; }

    double slice_time(int j) const { return t0 + (T - t0) * j / M; }

    ControlSignal optimal_signal() const {
        ControlSignal sig;
        sig.breakpoints.push_back(t0);
        int cur = 0;
        for (int j = 0; j < M; ++j) {
            int lab = nodes[cur].best_label;
            sig.labels.push_back(lab);
            sig.breakpoints.push_back(slice_time(j + 1));
            cur = nodes[cur].children[lab];
        }
        return sig;
    }

    /// States along the optimal control path, one per slice boundary.
    std::vector<int> optimal_path() const {
        std::vector<int> path{0};
        int cur = 0;
        for (int j = 0; j < M; ++j) {
            cur = nodes[cur].children[nodes[cur].best_label];
            path.push_back(cur);
        }
        return path;
    }

    json to_json() const {
        json j;
        j["t0"] = t0;
        j["T"] = T;
        j["dt"] = dt;
        j["slices"] = M;
        j["controls"] = K;
        j["value"] = value();
        json arr = json::array();
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const ValueNode& nd = nodes[i];
            json e;
            e["id"] = i;
            e["slice"] = nd.slice;
            e["parent"] = nd.parent;
            e["label_from_parent"] = nd.label_from_parent;
            std::string path;
            for (int cur = static_cast<int>(i); cur > 0; cur = nodes[cur].parent)
                path.insert(path.begin(), char('0' + nodes[cur].label_from_parent));
            e["control_path"] = path;
            e["prefix_cost"] = nd.prefix_cost;
            e["cost_to_go"] = nd.cost_to_go;
            e["best_label"] = nd.best_label;
            arr.push_back(std::move(e));
        }
        j["nodes"] = std::move(arr);
        return j;
    }
};

namespace control_detail {

/// Advance one slice under a constant control, accumulating the trapezoid of
/// the state cost along the way.
inline std::pair<SpectralField, double> advance_slice(const SpectralField& z, double ta,
                                                      double tb, double dt, int label,
                                                      const CBFParams& params,
                                                      const ControlModel& model,
                                                      const CostSpec& spec, Scheme scheme) {
    std::size_t nsteps = static_cast<std::size_t>(std::llround((tb - ta) / dt));
    if (nsteps == 0 || std::abs(nsteps * dt - (tb - ta)) > 1e-9 * std::max(1.0, tb - ta))
        throw std::invalid_argument("value_bruteforce: dt = " + std::to_string(dt) +
                                    " must divide the slice width " + std::to_string(tb - ta));
    SpectralField cur = z;
    double stage = 0.0;
    double prev_cost = spec.state_cost(cur);
    for (std::size_t s = 0; s < nsteps; ++s) {
        cur = step(cur, ta + s * dt, dt, label, params, model, scheme);
        double c = spec.state_cost(cur);
        stage += 0.5 * dt * (prev_cost + c);
        prev_cost = c;
    }
    stage += spec.penalty(label) * (tb - ta);
    return {std::move(cur), stage};
}

}  // namespace control_detail

inline ValueTree value_bruteforce(double t, double T, const SpectralField& z0, int M, double dt,
                                  const CBFParams& params, const ControlModel& model,
                                  const CostSpec& spec, Scheme scheme = Scheme::ImexRk2) {
    const int K = model.num_controls();
    if (M < 1 || K < 1) throw std::invalid_argument("value_bruteforce: need M >= 1, K >= 1");
    double paths = std::pow(double(K), double(M));
    if (paths > 1e4)
        throw BudgetError("value_bruteforce: K^M = " + std::to_string(K) + "^" +
                          std::to_string(M) + " exceeds the 10^4 budget");

    ValueTree tree;
    tree.t0 = t;
    tree.T = T;
    tree.dt = dt;
    tree.M = M;
    tree.K = K;

    // node count is known up front; reserving keeps parent references stable
    std::size_t total = 0, level = 1;
    for (int j = 0; j <= M; ++j) {
        total += level;
        level *= K;
    }
    tree.nodes.reserve(total);

    ValueNode root;
    root.state = z0;
    tree.nodes.push_back(std::move(root));

    // breadth-first expansion; children of the previous slice parallelize
    std::vector<int> frontier{0};
    for (int j = 0; j < M; ++j) {
        double ta = tree.slice_time(j);
        double tb = tree.slice_time(j + 1);
        std::vector<std::vector<ValueNode>> slot(frontier.size());
        parallel_for(frontier.size(), [&](std::size_t fi) {
            const ValueNode& parent = tree.nodes[frontier[fi]];
            slot[fi].resize(K);
            for (int a = 0; a < K; ++a) {
                auto [state, stage] = control_detail::advance_slice(
                    parent.state, ta, tb, dt, a, params, model, spec, scheme);
                ValueNode child;
                child.slice = j + 1;
                child.parent = frontier[fi];
                child.label_from_parent = a;
                child.prefix_cost = parent.prefix_cost + stage;
                child.state = std::move(state);
                slot[fi][a] = std::move(child);
            }
        });
        std::vector<int> next;
        for (std::size_t fi = 0; fi < frontier.size(); ++fi) {
            tree.nodes[frontier[fi]].children.resize(K);
            for (int a = 0; a < K; ++a) {
                int child = static_cast<int>(tree.nodes.size());
                tree.nodes[frontier[fi]].children[a] = child;
                next.push_back(child);
                tree.nodes.push_back(std::move(slot[fi][a]));
            }
        }
        frontier = std::move(next);
    }

    // backward Bellman pass; the fixed label order makes ties deterministic
    for (int i = static_cast<int>(tree.nodes.size()) - 1; i >= 0; --i) {
        ValueNode& nd = tree.nodes[i];
        if (nd.children.empty()) {
            nd.cost_to_go = spec.terminal_cost(nd.state);
            continue;
        }
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (int a = 0; a < K; ++a) {
            const ValueNode& ch = tree.nodes[nd.children[a]];
            double stage = ch.prefix_cost - nd.prefix_cost;
            double val = stage + ch.cost_to_go;
            if (val < best) {
                best = val;
                arg = a;
            }
        }
        nd.cost_to_go = best;
        nd.best_label = arg;
    }
    return tree;
}

/// |V(t,z) - min over depth-eta nodes of (prefix cost + cost-to-go)|,
/// relative. Exactly the tree recursion, so only FP accumulation remains.
inline double dpp_residual(const ValueTree& tree, int eta_slice) {
    if (eta_slice < 1 || eta_slice >= tree.M)
        throw std::out_of_range("dpp_residual: eta must be an interior slice boundary");
    double best = std::numeric_limits<double>::infinity();
    for (const ValueNode& nd : tree.nodes)
        if (nd.slice == eta_slice) best = std::min(best, nd.prefix_cost + nd.cost_to_go);
    double v = tree.value();
    return std::abs(v - best) / std::max(std::abs(v), 1e-300);
}

/// DPP residual with every quantity re-integrated from scratch (no shared
/// tree): V(t,z), the prefix costs to eta, and the values from eta onward.
inline double dpp_residual_recomputed(const ValueTree& tree, int eta_slice,
                                      const CBFParams& params, const ControlModel& model,
                                      const CostSpec& spec, Scheme scheme = Scheme::ImexRk2) {
    if (eta_slice < 1 || eta_slice >= tree.M)
        throw std::out_of_range("dpp_residual_recomputed: eta must be interior");
    const int K = tree.K;
    double eta = tree.slice_time(eta_slice);

    // enumerate prefix signals on [t0, eta]
    int prefix_count = 1;
    for (int j = 0; j < eta_slice; ++j) prefix_count *= K;
    std::vector<double> totals(prefix_count);
    parallel_for(prefix_count, [&](std::size_t idx) {
        SpectralField z = tree.nodes[0].state;
        double prefix = 0.0;
        std::size_t code = idx;
        for (int j = 0; j < eta_slice; ++j) {
            int lab = static_cast<int>(code % K);
            code /= K;
            auto [state, stage] = control_detail::advance_slice(
                z, tree.slice_time(j), tree.slice_time(j + 1), tree.dt, lab, params, model, spec,
                scheme);
            z = std::move(state);
            prefix += stage;
        }
        ValueTree sub = value_bruteforce(eta, tree.T, z, tree.M - eta_slice, tree.dt, params,
                                         model, spec, scheme);
        totals[idx] = prefix + sub.value();
    });
    double best = std::numeric_limits<double>::infinity();
    for (double v : totals) best = std::min(best, v);
    ValueTree fresh = value_bruteforce(tree.t0, tree.T, tree.nodes[0].state, tree.M, tree.dt,
                                       params, model, spec, scheme);
    double v = fresh.value();
    return std::abs(v - best) / std::max(std::abs(v), 1e-300);
}

// ---------------------------------------------------------------------------
// V-norm gradient and viscosity-solution diagnostics
// ---------------------------------------------------------------------------

/// Frechet derivative of ||z||_V^2 on the torus: 2 (A + I) z.
inline SpectralField vnorm_gradient(const SpectralField& z) {
    SpectralField out = ipa_apply(z);
    out *= 2.0;
    return out;
}

/// Test function psi(t,z) = phi(t,z) + delta(t) ||z||_V^2 with supplied
/// evaluators for phi, its time derivative, and its H-gradient.
struct TestFunction {
    std::function<double(double, const SpectralField&)> phi;
    std::function<double(double, const SpectralField&)> phi_t;
    std::function<SpectralField(double, const SpectralField&)> phi_grad;
    std::function<double(double)> delta;
    std::function<double(double)> delta_t;

    double psi(double t, const SpectralField& z) const {
        return phi(t, z) + delta(t) * norm_v_sq(z);
    }
    double psi_t(double t, const SpectralField& z) const {
        return phi_t(t, z) + delta_t(t) * norm_v_sq(z);
    }
    SpectralField psi_grad(double t, const SpectralField& z) const {
        SpectralField g = phi_grad(t, z);
        SpectralField v = vnorm_gradient(z);
        v *= delta(t);
        g += v;
        return g;
    }

    /// delta > 0 on (0,T) sampled, and the supplied derivatives agree with
    /// finite differences at (t, z) to the given tolerance.
    bool validate(double t, double T, const SpectralField& z, double eps = 1e-6,
                  double tol = 1e-4) const {
        for (int i = 1; i < 32; ++i) {
            double s = T * i / 32.0;
            if (s > 0.0 && s < T && !(delta(s) > 0.0)) return false;
        }
        double fd_t = (phi(t + eps, z) - phi(t - eps, z)) / (2.0 * eps);
        if (std::abs(fd_t - phi_t(t, z)) > tol * std::max(1.0, std::abs(fd_t))) return false;
        SpectralField dir = z;
        if (norm_h(dir) == 0.0) return true;
        dir *= 1.0 / norm_h(dir);
        SpectralField zp = z, zm = z;
        SpectralField scaled = dir;
        scaled *= eps;
        zp += scaled;
        zm -= scaled;
        double fd_g = (phi(t, zp) - phi(t, zm)) / (2.0 * eps);
        double an_g = inner_h(phi_grad(t, z), dir);
        return std::abs(fd_g - an_g) <= tol * std::max(1.0, std::abs(fd_g));
    }
};

/// Scalar polynomial in t for the quadratic test-function coefficients.
struct Polynomial {
    std::vector<double> c;  // c[0] + c[1] t + ...

    double operator()(double t) const {
        double acc = 0.0;
        for (std::size_t i = c.size(); i-- > 0;) acc = acc * t + c[i];
        return acc;
    }
    Polynomial derivative() const {
        Polynomial d;
        for (std::size_t i = 1; i < c.size(); ++i) d.c.push_back(c[i] * i);
        if (d.c.empty()) d.c.push_back(0.0);
        return d;
    }
};

/// phi(t,z) = q0(t) + q1(t) (y1, z)_H + q2(t) ||z||_H^2, delta(t) > 0.
inline TestFunction quadratic_test_function(Polynomial q0, Polynomial q1, SpectralField y1,
                                            Polynomial q2, Polynomial delta) {
    TestFunction tf;
    auto q0d = q0.derivative();
    auto q1d = q1.derivative();
    auto q2d = q2.derivative();
    auto deltad = delta.derivative();
    auto y = std::make_shared<SpectralField>(std::move(y1));
    tf.phi = [=](double t, const SpectralField& z) {
        double lin = y->coeffs.empty() ? 0.0 : inner_h(*y, z);
        return q0(t) + q1(t) * lin + q2(t) * norm_h_sq(z);
    };
    tf.phi_t = [=](double t, const SpectralField& z) {
        double lin = y->coeffs.empty() ? 0.0 : inner_h(*y, z);
        return q0d(t) + q1d(t) * lin + q2d(t) * norm_h_sq(z);
    };
    tf.phi_grad = [=](double t, const SpectralField& z) {
        SpectralField g = z;
        g *= 2.0 * q2(t);
        if (!y->coeffs.empty()) {
            SpectralField lin = *y;
            lin *= q1(t);
            g += lin;
        }
        return g;
    };
    tf.delta = [delta](double t) { return delta(t); };
    tf.delta_t = [deltad](double t) { return deltad(t); };
    return tf;
}

namespace control_detail {

/// G(z) = mu A z + alpha z + B(z) + beta C(z), the operator side of the HJB
/// pairing (alpha = 0 recovers the reference form).
inline SpectralField hjb_operator(const SpectralField& z, const CBFParams& params) {
    SpectralField g = stokes_apply(z);
    g *= params.mu;
    if (params.alpha != 0.0) {
        SpectralField az = z;
        az *= params.alpha;
        g += az;
    }
    if (params.convection) g += convective_B(z);
    if (params.beta != 0.0) {
        SpectralField c = damping_C(z, params.r);
        c *= params.beta;
        g += c;
    }
    return g;
}

}  // namespace control_detail

/// Supersolution expression at (t,z) for the test function psi:
///   -psi_t + (mu A z + B(z) + beta C(z), D psi)_H + F(t, z, -D psi);
/// expected <= 0 at minima of V + psi.
inline double supersolution_residual(double t, const SpectralField& z, const TestFunction& psi,
                                     const CBFParams& params, const ControlModel& model,
                                     const CostSpec& spec) {
    SpectralField dpsi = psi.psi_grad(t, z);
    SpectralField g = control_detail::hjb_operator(z, params);
    SpectralField neg = dpsi;
    neg *= -1.0;
    return -psi.psi_t(t, z) + inner_h(g, dpsi) + hamiltonian(t, z, neg, model, spec).first;
}

/// Subsolution counterpart:
///   psi_t - (mu A z + B(z) + beta C(z), D psi)_H + F(t, z, D psi);
/// expected >= 0 at maxima of V - psi.
inline double subsolution_residual(double t, const SpectralField& z, const TestFunction& psi,
                                   const CBFParams& params, const ControlModel& model,
                                   const CostSpec& spec) {
    SpectralField dpsi = psi.psi_grad(t, z);
    SpectralField g = control_detail::hjb_operator(z, params);
    return psi.psi_t(t, z) - inner_h(g, dpsi) + hamiltonian(t, z, dpsi, model, spec).first;
}

// ---------------------------------------------------------------------------
// HJB residual diagnostic along the brute-force optimum
// ---------------------------------------------------------------------------

struct HjbDiagnosticOptions {
    double delta0 = 1e-4;     // constant delta(t) of the fitted test function
    double probe_eps = 1e-4;  // directional finite-difference step
};

/// At each interior slice of the optimal path, fit psi from the discrete
/// value function (linear-in-z local model via directional differences on
/// the span of {G(z), f(.,a)}, one-sided difference in t) and evaluate the
/// supersolution expression. A diagnostic, not a theorem-level assertion:
/// residuals track the HJB defect of the discretized problem.
inline std::vector<double> hjb_residual_along_optimal(const ValueTree& tree,
                                                      const CBFParams& params,
                                                      const ControlModel& model,
                                                      const CostSpec& spec,
                                                      const HjbDiagnosticOptions& opts = {},
                                                      Scheme scheme = Scheme::ImexRk2) {
    std::vector<int> path = tree.optimal_path();
    std::vector<double> residuals;
    for (int j = 1; j < tree.M; ++j) {
        double eta = tree.slice_time(j);
        const SpectralField& zstar = tree.nodes[path[j]].state;
        int remaining = tree.M - j;

        auto value_from = [&](double t, const SpectralField& z, int slices) {
            return value_bruteforce(t, tree.T, z, slices, tree.dt, params, model, spec, scheme)
                .value();
        };
        double v0 = tree.nodes[path[j]].cost_to_go;

        // time slope from the next slice boundary; at the last interior slice
        // the value at T is the terminal cost itself
        double vt;
        if (remaining >= 2)
            vt = (value_from(tree.slice_time(j + 1), zstar, remaining - 1) - v0) /
                 (tree.slice_time(j + 1) - eta);
        else
            vt = (spec.terminal_cost(zstar) - v0) / (tree.T - eta);

        // orthonormal probe directions spanning the operator and forcing terms
        std::vector<SpectralField> dirs;
        auto add_dir = [&](SpectralField f) {
            for (const SpectralField& d : dirs) {
                SpectralField proj = d;
                proj *= inner_h(d, f);
                f -= proj;
            }
            double nrm = norm_h(f);
            if (nrm > 1e-12) {
                f *= 1.0 / nrm;
                dirs.push_back(std::move(f));
            }
        };
        add_dir(control_detail::hjb_operator(zstar, params));
        for (int a = 0; a < model.num_controls(); ++a) add_dir(model.force(eta, a));

        SpectralField p(zstar.grid);  // projected H-gradient of V at (eta, z*)
        for (const SpectralField& d : dirs) {
            SpectralField zp = zstar, zm = zstar;
            SpectralField stepd = d;
            stepd *= opts.probe_eps;
            zp += stepd;
            zm -= stepd;
            double slope =
                (value_from(eta, zp, remaining) - value_from(eta, zm, remaining)) /
                (2.0 * opts.probe_eps);
            SpectralField contrib = d;
            contrib *= slope;
            p += contrib;
        }

        // psi = -(v0 + vt (t - eta) + (p, z - z*)) + delta0 ||z||_V^2
        TestFunction psi;
        auto pfield = std::make_shared<SpectralField>(std::move(p));
        auto zs = std::make_shared<SpectralField>(zstar);
        double base = v0 - inner_h(*pfield, *zs);
        psi.phi = [=](double t, const SpectralField& z) {
            return -(base + vt * (t - eta) + inner_h(*pfield, z));
        };
        psi.phi_t = [=](double, const SpectralField&) { return -vt; };
        psi.phi_grad = [=](double, const SpectralField&) {
            SpectralField g = *pfield;
            g *= -1.0;
            return g;
        };
        psi.delta = [=](double) { return opts.delta0; };
        psi.delta_t = [](double) { return 0.0; };

        residuals.push_back(supersolution_residual(eta, zstar, psi, params, model, spec));
    }
    return residuals;
}

}  // namespace cbf
