#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbf/control_model.hpp"
#include "cbf/norms.hpp"
#include "cbf/operators.hpp"
#include "cbf/params.hpp"

namespace cbf {

enum class Scheme { ImexEuler, ImexRk2 };

inline Scheme scheme_from_string(const std::string& s) {
    if (s == "imex_euler") return Scheme::ImexEuler;
    if (s == "imex_rk2") return Scheme::ImexRk2;
    throw std::invalid_argument("unknown scheme: " + s);
}

/// Nonfinite state detected while stepping; carries the last valid state.
struct BlowupError : std::runtime_error {
    double last_time;
    SpectralField last_state;
    BlowupError(double t, SpectralField state)
        : std::runtime_error("nonfinite state at t = " + std::to_string(t) +
                             "; reduce the time step"),
          last_time(t),
          last_state(std::move(state)) {}
};

/// Right-hand side of the abstract controlled equation:
/// -mu A z - alpha z - B(z) - beta C(z) + f(t, a).
inline SpectralField rhs(const SpectralField& z, double t, int a, const CBFParams& params,
                         const ControlModel& model) {
    params.validate();
    SpectralField out = model.force(t, a);
    if (params.convection) out -= convective_B(z);
    if (params.beta != 0.0) {
        SpectralField c = damping_C(z, params.r);
        c *= params.beta;
        out -= c;
    }
    for_each_mode(z.grid.dim, z.grid.n, [&](std::size_t flat, const std::array<int, 3>& k) {
        double lin = params.mu * stokes_multiplier(k) + params.alpha;
        for (int c = 0; c < z.grid.dim; ++c) out.at(c, flat) -= lin * z.at(c, flat);
    });
    out.solenoidal = true;
    return out;
}

namespace detail {

/// Explicitly treated part N(z,t,a) = -B(z) - beta C(z) + f(t,a).
inline SpectralField nonlinear_rhs(const SpectralField& z, double t, int a,
                                   const CBFParams& params, const ControlModel& model) {
    SpectralField out = model.force(t, a);
    if (params.convection) out -= convective_B(z);
    if (params.beta != 0.0) {
        SpectralField c = damping_C(z, params.r);
        c *= params.beta;
        out -= c;
    }
    out.solenoidal = true;
    return out;
}

/// Multiply every mode by exp(-(mu |2 pi k|^2 + alpha) dt), the exact flow of
/// the stiff diagonal part.
inline void apply_decay(SpectralField& z, double dt, const CBFParams& params) {
    for_each_mode(z.grid.dim, z.grid.n, [&](std::size_t flat, const std::array<int, 3>& k) {
        double e = std::exp(-(params.mu * stokes_multiplier(k) + params.alpha) * dt);
        for (int c = 0; c < z.grid.dim; ++c) z.at(c, flat) *= e;
    });
}

inline void check_finite(const SpectralField& z1, double t, const SpectralField& z_prev) {
    if (!z1.finite()) throw BlowupError(t, z_prev);
}

}  // namespace detail

/// One integrating-factor IMEX step. The linear part is advanced exactly per
/// mode; B and C enter explicitly (Lawson-Euler / Lawson-Heun).
inline SpectralField step(const SpectralField& z, double t, double dt, int a,
                          const CBFParams& params, const ControlModel& model, Scheme scheme,
                          const SpectralField* k1_hint = nullptr) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
    SpectralField k1 = k1_hint ? *k1_hint : detail::nonlinear_rhs(z, t, a, params, model);
    if (scheme == Scheme::ImexEuler) {
        SpectralField z1 = z;
        k1 *= dt;
        z1 += k1;
        detail::apply_decay(z1, dt, params);
        detail::check_finite(z1, t, z);
        return z1;
    }
    // Heun on the integrating-factor form
    SpectralField zp = z;
    {
        SpectralField incr = k1;
        incr *= dt;
        zp += incr;
    }
    detail::apply_decay(zp, dt, params);
    SpectralField k2 = detail::nonlinear_rhs(zp, t + dt, a, params, model);
    SpectralField z1 = z;
    detail::apply_decay(z1, dt, params);
    detail::apply_decay(k1, dt, params);
    k1 += k2;
    k1 *= 0.5 * dt;
    z1 += k1;
    detail::check_finite(z1, t, z);
    z1.solenoidal = true;
    return z1;
}

enum class DiagLevel { Basic, Strong, DomainA };

/// Per-node scalars feeding the energy-balance and estimate checks.
struct StepDiagnostics {
    double t = 0.0;
    double h2 = 0.0;        // ||Z||_H^2
    double grad2 = 0.0;     // ||grad Z||_H^2
    double lp_rp1 = 0.0;    // ||Z||_{L^{r+1}}^{r+1}
    double f_z = 0.0;       // (f, Z)_H
    double f_h2 = 0.0;      // ||f||_H^2
    double f_vstar2 = 0.0;  // ||f||_{V*}^2
    // Strong level
    double a2 = 0.0;            // ||A Z||_H^2
    double b_az = 0.0;          // (B(Z), A Z)
    double c_az = 0.0;          // (C(Z), A Z)
    double f_az = 0.0;          // (f, A Z)
    double weighted_grad2 = 0.0;  // || |Z|^{(r-1)/2} grad Z ||^2
    double torus_rhs = 0.0;       // torus-equality expansion of (C(Z), A Z)
    double lp_3rp1 = 0.0;         // ||Z||_{L^{3(r+1)}}^{r+1}, strong-solution surrogate
    // D(A) level
    double a32 = 0.0;    // ||A^{3/2} Z||_H^2
    double b_a2z = 0.0;  // (B(Z), A^2 Z)
    double c_a2z = 0.0;  // (C(Z), A^2 Z)
    double f_a2z = 0.0;  // (f, A^2 Z)
};

struct IntegrateOptions {
    Scheme scheme = Scheme::ImexRk2;
    DiagLevel diag = DiagLevel::Basic;
    bool keep_states = true;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<SpectralField> states;  // empty when keep_states = false
    std::vector<StepDiagnostics> diag;  // one entry per node
    CBFParams params;
    ControlSignal signal;
    double dt = 0.0;
    DiagLevel diag_level = DiagLevel::Basic;

    std::size_t nodes() const { return times.size(); }

    /// Trapezoid prefix integrals of a diagnostic, one value per node.
    template <class Get>
    std::vector<double> cumulative(Get&& get) const {
        std::vector<double> out(nodes(), 0.0);
        for (std::size_t i = 1; i < nodes(); ++i) {
            double h = times[i] - times[i - 1];
            out[i] = out[i - 1] + 0.5 * h * (get(diag[i - 1]) + get(diag[i]));
        }
        return out;
    }
};

namespace detail {

/// Quadrature resolution for the L^{3(r+1)} surrogate norm; in 3D the exact
/// even-exponent rule is capped at 4n (the quantity is reported and checked
/// for finiteness, not asserted as an equality).
inline int surrogate_quad(const TorusGrid& g, double p) {
    int exact = quadrature::points_for_lp(g, p);
    if (g.dim == 3) return std::min(exact, fft::smooth_size(4 * g.n));
    return exact;
}

inline StepDiagnostics fill_diagnostics(const SpectralField& z, double t, int a,
                                        const CBFParams& params, const ControlModel& model,
                                        DiagLevel level) {
    StepDiagnostics d;
    d.t = t;
    d.h2 = norm_h_sq(z);
    d.grad2 = grad_norm_sq(z);
    SpectralField f = model.force(t, a);
    d.f_z = inner_h(f, z);
    d.f_h2 = norm_h_sq(f);
    d.f_vstar2 = vstar_norm_sq(f);
    if (level == DiagLevel::Basic) {
        d.lp_rp1 = lp_norm_pow(z, params.r.r + 1.0);
        return d;
    }

    DampingIntegrals quads = damping_integrals(z, params.r);
    d.lp_rp1 = quads.lp_rp1;
    d.weighted_grad2 = quads.weighted_grad2;
    double r = params.r.r;
    double p3 = 3.0 * (r + 1.0);
    d.lp_3rp1 = std::pow(lp_norm_pow(z, p3, surrogate_quad(z.grid, p3)), (r + 1.0) / p3);
    d.torus_rhs = quads.weighted_grad2 +
                  4.0 * (r - 1.0) / ((r + 1.0) * (r + 1.0)) * quads.grad_pow2;

    SpectralField az = stokes_apply(z, 1.0);
    d.a2 = norm_h_sq(az);
    d.f_az = inner_h(f, az);
    SpectralField bz;
    if (params.convection) {
        bz = convective_B(z);
        d.b_az = inner_h(bz, az);
    }
    SpectralField cz;
    if (params.beta != 0.0) {
        cz = damping_C(z, params.r);
        d.c_az = inner_h(cz, az);
    }
    if (level == DiagLevel::Strong) return d;

    SpectralField a2z = stokes_apply(z, 2.0);
    d.a32 = stokes_norm_sq(z, 1.5);
    d.f_a2z = inner_h(f, a2z);
    if (params.convection) d.b_a2z = inner_h(bz, a2z);
    if (params.beta != 0.0) d.c_a2z = inner_h(cz, a2z);
    return d;
}

}  // namespace detail

/// Integrate the controlled equation over [t, T]. dt must divide every
/// control interval; trajectories carry per-node diagnostics.
inline Trajectory integrate(const SpectralField& z0, const ControlSignal& signal, double t,
                            double T, double dt, const CBFParams& params,
                            const ControlModel& model, const IntegrateOptions& opts = {}) {
    params.validate();
    signal.validate(model.num_controls());
    if (!(T > t) || !(dt > 0.0)) throw std::invalid_argument("integrate: need T > t, dt > 0");
    if (std::abs(signal.breakpoints.front() - t) > 1e-12 ||
        std::abs(signal.breakpoints.back() - T) > 1e-12)
        throw std::invalid_argument("integrate: signal must span [t, T]");
    if (divergence_residual(z0) > 1e-8)
        throw std::invalid_argument("integrate: initial state is not solenoidal");
    for (std::size_t i = 1; i < signal.breakpoints.size(); ++i) {
        double len = signal.breakpoints[i] - signal.breakpoints[i - 1];
        double steps = len / dt;
        if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
            throw std::invalid_argument("integrate: dt must divide every control interval");
    }

    const std::size_t nsteps = static_cast<std::size_t>(std::llround((T - t) / dt));
    Trajectory traj;
    traj.params = params;
    traj.signal = signal;
    traj.dt = dt;
    traj.diag_level = opts.diag;
    traj.times.reserve(nsteps + 1);
    traj.diag.reserve(nsteps + 1);
    if (opts.keep_states) traj.states.reserve(nsteps + 1);

    SpectralField z = z0;
    z.solenoidal = true;
    for (std::size_t n = 0; n <= nsteps; ++n) {
        double tn = t + n * dt;
        int a = signal.label_at(tn + 0.5 * dt);
        traj.times.push_back(tn);
        traj.diag.push_back(detail::fill_diagnostics(z, tn, a, params, model, opts.diag));
        if (opts.keep_states) traj.states.push_back(z);
        if (n == nsteps) break;
        z = step(z, tn, dt, a, params, model, opts.scheme);
    }
    return traj;
}

}  // namespace cbf
