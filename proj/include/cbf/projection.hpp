#pragma once

#include "cbf/field.hpp"

namespace cbf {

/// Helmholtz-Hodge (Leray) projection onto divergence-free fields:
/// u_hat(k) -> u_hat(k) - k (k . u_hat(k)) / |k|^2, identity on k = 0.
inline SpectralField leray_project(const SpectralField& u) {
    SpectralField out = u;
    const int d = u.grid.dim;
    for_each_mode(d, u.grid.n, [&](std::size_t flat, const std::array<int, 3>& k) {
        double k2 = ksq(k);
        if (k2 == 0.0) return;
        Complex dot{0.0, 0.0};
        for (int c = 0; c < d; ++c) dot += double(k[c]) * u.at(c, flat);
        dot /= k2;
        for (int c = 0; c < d; ++c) out.at(c, flat) -= double(k[c]) * dot;
    });
    out.solenoidal = true;
    return out;
}

inline SpectralField leray_project(const PhysicalField& u) { return leray_project(transform(u)); }

}  // namespace cbf
