#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cbf/operators.hpp"

// Slow reference implementations of the nonlinearities, used only by tests.
// Physical-space evaluation is by direct summation (no FFT) on a 4x
// oversampled grid; the convective oracle convolves Fourier coefficients
// explicitly.
namespace cbf::oracle {

namespace detail {

inline void check_small(const TorusGrid& g) {
    if (g.n > 16) throw std::invalid_argument("oracle: grid too large (n <= 16)");
}

/// u(x_j) at m^dim points by direct summation over modes.
inline std::vector<std::vector<double>> direct_samples(const SpectralField& u, int m) {
    const int d = u.grid.dim;
    const int n = u.grid.n;
    std::size_t cells = 1;
    for (int i = 0; i < d; ++i) cells *= static_cast<std::size_t>(m);
    std::vector<std::vector<double>> vals(d, std::vector<double>(cells, 0.0));

    std::vector<std::array<int, 3>> points(cells);
    {
        std::size_t j = 0;
        std::array<int, 3> idx{0, 0, 0};
        if (d == 2) {
            for (idx[0] = 0; idx[0] < m; ++idx[0])
                for (idx[1] = 0; idx[1] < m; ++idx[1]) points[j++] = idx;
        } else {
            for (idx[0] = 0; idx[0] < m; ++idx[0])
                for (idx[1] = 0; idx[1] < m; ++idx[1])
                    for (idx[2] = 0; idx[2] < m; ++idx[2]) points[j++] = idx;
        }
    }
    for_each_mode(d, n, [&](std::size_t flat, const std::array<int, 3>& k) {
        bool nonzero = false;
        for (int c = 0; c < d; ++c) nonzero = nonzero || (u.at(c, flat) != Complex{0.0, 0.0});
        if (!nonzero) return;
        for (std::size_t j = 0; j < cells; ++j) {
            double phase = 0.0;
            for (int ax = 0; ax < d; ++ax) phase += double(k[ax]) * points[j][ax] / m;
            Complex ph = std::polar(1.0, two_pi * phase);
            for (int c = 0; c < d; ++c) vals[c][j] += (u.at(c, flat) * ph).real();
        }
    });
    return vals;
}

/// Fourier analysis of point values by direct summation, truncated to the band.
inline SpectralField direct_analysis(const TorusGrid& g, int m,
                                     const std::vector<std::vector<double>>& vals) {
    const int d = g.dim;
    SpectralField out(g);
    const int half = g.n / 2;
    std::size_t cells = vals[0].size();
    double measure = 1.0;
    for (int i = 0; i < d; ++i) measure /= m;
    for_each_mode(d, g.n, [&](std::size_t flat, const std::array<int, 3>& k) {
        if (std::abs(k[0]) >= half || std::abs(k[1]) >= half ||
            (d == 3 && std::abs(k[2]) >= half))
            return;
        std::size_t j = 0;
        std::array<int, 3> idx{0, 0, 0};
        std::vector<Complex> acc(d, Complex{0.0, 0.0});
        auto accumulate = [&](const std::array<int, 3>& pt) {
            double phase = 0.0;
            for (int ax = 0; ax < d; ++ax) phase += double(k[ax]) * pt[ax] / m;
            Complex ph = std::polar(1.0, -two_pi * phase);
            for (int c = 0; c < d; ++c) acc[c] += vals[c][j] * ph;
            ++j;
        };
        if (d == 2) {
            for (idx[0] = 0; idx[0] < m; ++idx[0])
                for (idx[1] = 0; idx[1] < m; ++idx[1]) accumulate(idx);
        } else {
            for (idx[0] = 0; idx[0] < m; ++idx[0])
                for (idx[1] = 0; idx[1] < m; ++idx[1])
                    for (idx[2] = 0; idx[2] < m; ++idx[2]) accumulate(idx);
        }
        (void)cells;
        for (int c = 0; c < d; ++c) out.at(c, flat) = acc[c] * measure;
    });
    return out;
}

}  // namespace detail

/// C(u) = P(|u|^{r-1} u) by direct summation on a 4x oversampled grid.
inline SpectralField damping_C_oracle(const SpectralField& u, const AbsorptionExponent& rexp) {
    detail::check_small(u.grid);
    const int d = u.grid.dim;
    const int m = 4 * u.grid.n;
    auto vals = detail::direct_samples(u, m);
    const double e = 0.5 * (rexp.r - 1.0);
    std::size_t cells = vals[0].size();
    std::vector<std::vector<double>> out(d, std::vector<double>(cells));
    for (std::size_t p = 0; p < cells; ++p) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) s += vals[c][p] * vals[c][p];
        double w = (e == 0.0) ? 1.0 : std::pow(s, e);
        for (int c = 0; c < d; ++c) out[c][p] = w * vals[c][p];
    }
    return leray_project(detail::direct_analysis(u.grid, m, out));
}

/// Unprojected (u . grad) v by explicit convolution of Fourier coefficients:
/// adv_i(k) = sum_{p+q=k} u_hat_j(p) (2 pi i q_j) v_hat_i(q).
inline SpectralField advect_oracle(const SpectralField& u, const SpectralField& v) {
    detail::check_small(u.grid);
    check_same_grid(u, v);
    const int d = u.grid.dim;
    const int n = u.grid.n;
    const int half = n / 2;
    SpectralField out(u.grid);
    for_each_mode(d, n, [&](std::size_t pflat, const std::array<int, 3>& p) {
        if (std::abs(p[0]) >= half || std::abs(p[1]) >= half ||
            (d == 3 && std::abs(p[2]) >= half))
            return;
        for_each_mode(d, n, [&](std::size_t qflat, const std::array<int, 3>& q) {
            if (std::abs(q[0]) >= half || std::abs(q[1]) >= half ||
                (d == 3 && std::abs(q[2]) >= half))
                return;
            std::array<int, 3> k{p[0] + q[0], p[1] + q[1], p[2] + q[2]};
            if (std::abs(k[0]) >= half || std::abs(k[1]) >= half ||
                (d == 3 && std::abs(k[2]) >= half))
                return;
            std::size_t kflat = static_cast<std::size_t>(slot(k[0], n));
            kflat = kflat * n + slot(k[1], n);
            if (d == 3) kflat = kflat * n + slot(k[2], n);
            for (int i = 0; i < d; ++i) {
                Complex term{0.0, 0.0};
                for (int j = 0; j < d; ++j)
                    term += u.at(j, pflat) * Complex{0.0, two_pi * q[j]} * v.at(i, qflat);
                out.at(i, kflat) += term;
            }
        });
    });
    return out;
}

/// B(u,v) = P[(u . grad) v] via the convolution oracle.
inline SpectralField convective_B_oracle(const SpectralField& u, const SpectralField& v) {
    return leray_project(advect_oracle(u, v));
}

inline SpectralField convective_B_oracle(const SpectralField& u) {
    return convective_B_oracle(u, u);
}

/// b(u,v,w) = ((u . grad) v, w)_H via the convolution oracle.
inline double trilinear_oracle(const SpectralField& u, const SpectralField& v,
                               const SpectralField& w) {
    return inner_h(advect_oracle(u, v), w);
}

}  // namespace cbf::oracle
