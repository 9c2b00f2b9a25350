#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbf/random_field.hpp"
#include "cbf/stokes.hpp"

namespace cbf {

/// Finite control set with a forcing map (t, a) -> f(t,a) in V, bounded and
/// continuous in t per control.
struct ControlModel {
    TorusGrid grid;
    std::vector<std::string> labels;
    std::function<SpectralField(double, int)> forcing;

    int num_controls() const { return static_cast<int>(labels.size()); }

    SpectralField force(double t, int a) const {
        if (a < 0 || a >= num_controls())
            throw std::out_of_range("ControlModel: control index out of range");
        return forcing(t, a);
    }

    /// Zero forcing for any of K labels.
    static ControlModel zero(const TorusGrid& grid, int K = 1) {
        ControlModel m;
        m.grid = grid;
        for (int i = 0; i < K; ++i) m.labels.push_back("a" + std::to_string(i));
        m.forcing = [grid](double, int) { return SpectralField(grid); };
        return m;
    }

    /// K seeded smooth solenoidal base fields F_a with time envelope
    /// cos(omega t); omega = 0 gives autonomous forcing.
    static ControlModel seeded(const TorusGrid& grid, int K, std::uint64_t seed,
                               double amplitude = 1.0, double omega = 0.0,
                               double spectrum_s = 3.0) {
        ControlModel m;
        m.grid = grid;
        auto base = std::make_shared<std::vector<SpectralField>>();
        for (int a = 0; a < K; ++a) {
            m.labels.push_back("a" + std::to_string(a));
            RandomFieldOptions opts;
            opts.spectrum_s = spectrum_s;
            SpectralField f = random_solenoidal_field(grid, seed + 1000 * (a + 1), opts);
            double vn = std::sqrt(norm_v_sq(f));
            if (vn > 0.0) f *= amplitude / vn;  // unit V norm times amplitude
            base->push_back(std::move(f));
        }
        m.forcing = [base, omega](double t, int a) {
            SpectralField f = (*base)[a];
            if (omega != 0.0) f *= std::cos(omega * t);
            return f;
        };
        return m;
    }

    struct ContinuityReport {
        double sup_v_norm = 0.0;   // max_t max_a ||f(t,a)||_V over the samples
        double max_rate = 0.0;     // max sampled ||f(t+h,a)-f(t,a)||_V / h
    };

    /// Sampled boundedness and t-continuity of the forcing map.
    ContinuityReport sample_continuity(double t0, double t1, int samples = 32) const {
        ContinuityReport rep;
        double h = (t1 - t0) / samples;
        for (int a = 0; a < num_controls(); ++a) {
            SpectralField prev = force(t0, a);
            rep.sup_v_norm = std::max(rep.sup_v_norm, std::sqrt(norm_v_sq(prev)));
            for (int i = 1; i <= samples; ++i) {
                SpectralField cur = force(t0 + i * h, a);
                rep.sup_v_norm = std::max(rep.sup_v_norm, std::sqrt(norm_v_sq(cur)));
                rep.max_rate = std::max(rep.max_rate, std::sqrt(norm_v_sq(cur - prev)) / h);
                prev = std::move(cur);
            }
        }
        return rep;
    }
};

/// Piecewise-constant admissible control on [t0, T].
struct ControlSignal {
    std::vector<double> breakpoints;  // strictly increasing, t0 = front, T = back
    std::vector<int> labels;          // one per interval

    void validate(int num_controls) const {
        if (breakpoints.size() < 2 || labels.size() + 1 != breakpoints.size())
            throw std::invalid_argument("ControlSignal: need M+1 breakpoints for M labels");
        for (std::size_t i = 1; i < breakpoints.size(); ++i)
            if (!(breakpoints[i] > breakpoints[i - 1]))
                throw std::invalid_argument("ControlSignal: breakpoints must increase");
        for (int lab : labels)
            if (lab < 0 || lab >= num_controls)
                throw std::invalid_argument("ControlSignal: label out of range");
    }

    /// Interval label, right-continuous; clamped at the ends.
    int label_at(double t) const {
        if (t <= breakpoints.front()) return labels.front();
        for (std::size_t i = 1; i + 1 < breakpoints.size(); ++i)
            if (t < breakpoints[i]) return labels[i - 1];
        return labels.back();
    }

    static ControlSignal constant(double t0, double T, int label) {
        return ControlSignal{{t0, T}, {label}};
    }
};

}  // namespace cbf
