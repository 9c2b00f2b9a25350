#pragma once

#include <cmath>

#include "cbf/field.hpp"

namespace cbf {

/// Apply A^power as the Fourier multiplier (4 pi^2 |k|^2)^power. The k = 0
/// mode maps to zero for power > 0; A alone is never inverted (0 is an
/// eigenvalue), use ipa_solve for (I+A)^{-1}.
inline SpectralField stokes_apply(const SpectralField& u, double power = 1.0) {
    SpectralField out = u;
    for_each_mode(u.grid.dim, u.grid.n, [&](std::size_t flat, const std::array<int, 3>& k) {
        double lam = stokes_multiplier(k);
        double mult = (lam == 0.0) ? (power == 0.0 ? 1.0 : 0.0) : std::pow(lam, power);
        for (int c = 0; c < u.grid.dim; ++c) out.at(c, flat) *= mult;
    });
    return out;
}

/// (I + A) u.
inline SpectralField ipa_apply(const SpectralField& u) {
    SpectralField out = u;
    for_each_mode(u.grid.dim, u.grid.n, [&](std::size_t flat, const std::array<int, 3>& k) {
        double mult = 1.0 + stokes_multiplier(k);
        for (int c = 0; c < u.grid.dim; ++c) out.at(c, flat) *= mult;
    });
    return out;
}

/// (I + A)^{-1} u, multiplier 1 / (1 + 4 pi^2 |k|^2).
inline SpectralField ipa_solve(const SpectralField& u) {
    SpectralField out = u;
    for_each_mode(u.grid.dim, u.grid.n, [&](std::size_t flat, const std::array<int, 3>& k) {
        double mult = 1.0 / (1.0 + stokes_multiplier(k));
        for (int c = 0; c < u.grid.dim; ++c) out.at(c, flat) *= mult;
    });
    return out;
}

/// d u / d x_axis as a spectral field (multiplier 2 pi i k_axis).
inline SpectralField partial_derivative(const SpectralField& u, int axis) {
    SpectralField out = u;
    out.solenoidal = u.solenoidal;
    for_each_mode(u.grid.dim, u.grid.n, [&](std::size_t flat, const std::array<int, 3>& k) {
        Complex mult{0.0, two_pi * k[axis]};
        for (int c = 0; c < u.grid.dim; ++c) out.at(c, flat) *= mult;
    });
    return out;
}

/// ||grad u||_H^2 = sum_k 4 pi^2 |k|^2 |u_hat(k)|^2 = ||A^{1/2} u||_H^2.
inline double grad_norm_sq(const SpectralField& u) {
    double sum = 0.0;
    for_each_mode(u.grid.dim, u.grid.n, [&](std::size_t flat, const std::array<int, 3>& k) {
        double lam = stokes_multiplier(k);
        for (int c = 0; c < u.grid.dim; ++c) sum += lam * std::norm(u.at(c, flat));
    });
    return sum;
}

inline double norm_v_sq(const SpectralField& u) { return norm_h_sq(u) + grad_norm_sq(u); }

/// ||A u||_H^2.
inline double stokes_norm_sq(const SpectralField& u, double power = 1.0) {
    double sum = 0.0;
    for_each_mode(u.grid.dim, u.grid.n, [&](std::size_t flat, const std::array<int, 3>& k) {
        double lam = stokes_multiplier(k);
        double m2 = (lam == 0.0) ? 0.0 : std::pow(lam, 2.0 * power);
        for (int c = 0; c < u.grid.dim; ++c) sum += m2 * std::norm(u.at(c, flat));
    });
    return sum;
}

/// ||(I+A) u||_H.
inline double da_norm(const SpectralField& u) {
    double sum = 0.0;
    for_each_mode(u.grid.dim, u.grid.n, [&](std::size_t flat, const std::array<int, 3>& k) {
        double mult = 1.0 + stokes_multiplier(k);
        for (int c = 0; c < u.grid.dim; ++c) sum += mult * mult * std::norm(u.at(c, flat));
    });
    return std::sqrt(sum);
}

/// Dual norm ||u||_{V*}^2 = sum_k |u_hat|^2 / (1 + 4 pi^2 |k|^2).
inline double vstar_norm_sq(const SpectralField& u) {
    double sum = 0.0;
    for_each_mode(u.grid.dim, u.grid.n, [&](std::size_t flat, const std::array<int, 3>& k) {
        double mult = 1.0 / (1.0 + stokes_multiplier(k));
        for (int c = 0; c < u.grid.dim; ++c) sum += mult * std::norm(u.at(c, flat));
    });
    return sum;
}

}  // namespace cbf
