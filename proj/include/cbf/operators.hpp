#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cbf/field.hpp"
#include "cbf/norms.hpp"
#include "cbf/projection.hpp"
#include "cbf/stokes.hpp"

namespace cbf {

/// Exponent r of the absorption term |u|^{r-1} u. Odd integer r makes the
/// damping a polynomial of degree r, so padded quadrature is exact.
struct AbsorptionExponent {
    double r = 3.0;

    AbsorptionExponent() = default;
    AbsorptionExponent(double value) : r(value) {
        if (!(r >= 1.0)) throw std::invalid_argument("absorption exponent must be >= 1");
    }

    bool integer() const { return std::abs(r - std::round(r)) < 1e-12; }
    bool odd_integer() const {
        return integer() && static_cast<long>(std::llround(r)) % 2 == 1;
    }

    /// Quadrature resolution for degree-(r+1) integrands |u|^{r-1}|w|^2 and
    /// for the damping product itself. Non-polynomial exponents fall back to
    /// the grid's padded resolution (quadrature error ~1e-6 at desk scale).
    int quad_points(const TorusGrid& g) const {
        if (odd_integer())
            return quadrature::points_for_degree(g, static_cast<int>(std::llround(r)) + 1);
        return fft::smooth_size(std::max(g.padded_n(), 2 * g.n));
    }
};

/// Gronwall rate for the r > 3 continuous-dependence estimate:
/// (r-3) / (2 mu (r-1)) * [4 / (beta mu (r-1))]^{2/(r-3)}.
inline double varrho(double mu, double beta, double r) {
    if (!(r > 3.0)) throw std::invalid_argument("varrho requires r > 3");
    return (r - 3.0) / (2.0 * mu * (r - 1.0)) *
           std::pow(4.0 / (beta * mu * (r - 1.0)), 2.0 / (r - 3.0));
}

namespace detail {

/// Point samples of every component of u on the m-grid.
inline std::vector<std::vector<double>> sample_components(const SpectralField& u, int m) {
    std::vector<std::vector<double>> vals(u.grid.dim);
    for (int c = 0; c < u.grid.dim; ++c) {
        std::vector<Complex> buf = synthesize(u.component(c), u.grid.dim, u.grid.n, m);
        vals[c].resize(buf.size());
        for (std::size_t j = 0; j < buf.size(); ++j) vals[c][j] = buf[j].real();
    }
    return vals;
}

/// Point samples of every partial derivative d_j u_i on the m-grid,
/// indexed grad[i][j].
inline std::vector<std::vector<std::vector<double>>> sample_gradients(const SpectralField& u,
                                                                      int m) {
    const int d = u.grid.dim;
    const int n = u.grid.n;
    std::vector<std::vector<std::vector<double>>> grad(d);
    std::vector<Complex> dcomp(u.modes());
    for (int i = 0; i < d; ++i) {
        grad[i].resize(d);
        for (int j = 0; j < d; ++j) {
            const Complex* src = u.component(i);
            for_each_mode(d, n, [&](std::size_t flat, const std::array<int, 3>& k) {
                dcomp[flat] = src[flat] * Complex{0.0, two_pi * k[j]};
            });
            std::vector<Complex> buf = synthesize(dcomp.data(), d, n, m);
            grad[i][j].resize(buf.size());
            for (std::size_t p = 0; p < buf.size(); ++p) grad[i][j][p] = buf[p].real();
        }
    }
    return grad;
}

/// Analyze d real-valued point buffers back onto the grid band.
inline SpectralField analyze_components(const TorusGrid& g, int m,
                                        const std::vector<std::vector<double>>& vals) {
    SpectralField out(g);
    for (int c = 0; c < g.dim; ++c) {
        std::vector<Complex> buf(vals[c].size());
        for (std::size_t j = 0; j < buf.size(); ++j) buf[j] = Complex{vals[c][j], 0.0};
        analyze(buf, g.dim, m, out.component(c), g.n);
    }
    return out;
}

inline int conv_quad_points(const TorusGrid& g) { return quadrature::points_for_degree(g, 3); }

}  // namespace detail

// ---------------------------------------------------------------------------
// convective operator
// ---------------------------------------------------------------------------

/// Trilinear form b(u,v,w) = int (u . grad) v . w dx by dealiased quadrature.
inline double convective_b(const SpectralField& u, const SpectralField& v,
                           const SpectralField& w) {
    check_same_grid(u, v);
    check_same_grid(u, w);
    const int d = u.grid.dim;
    const int m = detail::conv_quad_points(u.grid);
    auto uv = detail::sample_components(u, m);
    auto gv = detail::sample_gradients(v, m);
    auto wv = detail::sample_components(w, m);
    double sum = 0.0;
    const std::size_t cells = uv[0].size();
    for (std::size_t p = 0; p < cells; ++p) {
        double acc = 0.0;
        for (int i = 0; i < d; ++i) {
            double adv = 0.0;
            for (int j = 0; j < d; ++j) adv += uv[j][p] * gv[i][j][p];
            acc += adv * wv[i][p];
        }
        sum += acc;
    }
    return sum * quadrature::cell_measure(d, m);
}

/// B(u,v) = P[(u . grad) v], dealiased by padding so the retained band is
/// alias-free. B(u) := B(u,u).
inline SpectralField convective_B(const SpectralField& u, const SpectralField& v) {
    check_same_grid(u, v);
    const int d = u.grid.dim;
    const int m = detail::conv_quad_points(u.grid);
    auto uv = detail::sample_components(u, m);
    auto gv = detail::sample_gradients(v, m);
    std::vector<std::vector<double>> adv(d);
    const std::size_t cells = uv[0].size();
    for (int i = 0; i < d; ++i) {
        adv[i].assign(cells, 0.0);
        for (int j = 0; j < d; ++j)
            for (std::size_t p = 0; p < cells; ++p) adv[i][p] += uv[j][p] * gv[i][j][p];
    }
    return leray_project(detail::analyze_components(u.grid, m, adv));
}

inline SpectralField convective_B(const SpectralField& u) { return convective_B(u, u); }

// ---------------------------------------------------------------------------
// Forchheimer damping
// ---------------------------------------------------------------------------

/// C(u) = P(|u|^{r-1} u). |u|^{r-1} is evaluated as (|u|^2)^{(r-1)/2} with no
/// epsilon floor; continuous at u = 0 for every r >= 1.
inline SpectralField damping_C(const SpectralField& u, const AbsorptionExponent& rexp,
                               int quad_points = 0) {
    const int d = u.grid.dim;
    const int m = quad_points ? quad_points : rexp.quad_points(u.grid);
    auto uv = detail::sample_components(u, m);
    const std::size_t cells = uv[0].size();
    const double e = 0.5 * (rexp.r - 1.0);
    std::vector<std::vector<double>> out(d, std::vector<double>(cells));
    for (std::size_t p = 0; p < cells; ++p) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) s += uv[c][p] * uv[c][p];
        double w = (e == 0.0) ? 1.0 : std::pow(s, e);
        for (int c = 0; c < d; ++c) out[c][p] = w * uv[c][p];
    }
    return leray_project(detail::analyze_components(u.grid, m, out));
}

/// Gateaux derivative of C at u in direction y:
///   r = 1:      P(y)
///   1 < r < 3:  P(|u|^{r-1} y) + (r-1) P(u |u|^{r-3} (u.y)), 0 where u = 0
///   r >= 3:     P(|u|^{r-1} y) + (r-1) P(u |u|^{r-3} (u.y))
inline SpectralField gateaux_C(const SpectralField& u, const SpectralField& y,
                               const AbsorptionExponent& rexp, int quad_points = 0) {
    check_same_grid(u, y);
    if (rexp.r == 1.0) return leray_project(y);
    const int d = u.grid.dim;
    const int m = quad_points ? quad_points : rexp.quad_points(u.grid);
    auto uv = detail::sample_components(u, m);
    auto yv = detail::sample_components(y, m);
    const std::size_t cells = uv[0].size();
    const double r = rexp.r;
    std::vector<std::vector<double>> out(d, std::vector<double>(cells));
    for (std::size_t p = 0; p < cells; ++p) {
        double s = 0.0, udoty = 0.0;
        for (int c = 0; c < d; ++c) {
            s += uv[c][p] * uv[c][p];
            udoty += uv[c][p] * yv[c][p];
        }
        double w1 = (s > 0.0) ? std::pow(s, 0.5 * (r - 1.0)) : 0.0;
        double w2 = (s > 0.0) ? (r - 1.0) * std::pow(s, 0.5 * (r - 3.0)) * udoty : 0.0;
        for (int c = 0; c < d; ++c) out[c][p] = w1 * yv[c][p] + w2 * uv[c][p];
    }
    return leray_project(detail::analyze_components(u.grid, m, out));
}

// ---------------------------------------------------------------------------
// weighted quadratures used by the estimates
// ---------------------------------------------------------------------------

/// || |v|^{(r-1)/2} w ||_H^2 = int |v|^{r-1} |w|^2 dx.
inline double weighted_h_norm_sq(const SpectralField& v, const SpectralField& w,
                                 const AbsorptionExponent& rexp, int quad_points = 0) {
    check_same_grid(v, w);
    const int d = v.grid.dim;
    const int m = quad_points ? quad_points : rexp.quad_points(v.grid);
    auto vv = detail::sample_components(v, m);
    auto wv = detail::sample_components(w, m);
    const double e = 0.5 * (rexp.r - 1.0);
    double sum = 0.0;
    const std::size_t cells = vv[0].size();
    for (std::size_t p = 0; p < cells; ++p) {
        double s = 0.0, w2 = 0.0;
        for (int c = 0; c < d; ++c) {
            s += vv[c][p] * vv[c][p];
            w2 += wv[c][p] * wv[c][p];
        }
        sum += ((e == 0.0) ? 1.0 : std::pow(s, e)) * w2;
    }
    return sum * quadrature::cell_measure(d, m);
}

/// || |u|^{(r-1)/2} grad u ||_H^2 = int |u|^{r-1} |grad u|^2 dx.
inline double weighted_grad_norm_sq(const SpectralField& u, const AbsorptionExponent& rexp,
                                    int quad_points = 0) {
    const int d = u.grid.dim;
    const int m = quad_points ? quad_points : rexp.quad_points(u.grid);
    auto uv = detail::sample_components(u, m);
    auto gv = detail::sample_gradients(u, m);
    const double e = 0.5 * (rexp.r - 1.0);
    double sum = 0.0;
    const std::size_t cells = uv[0].size();
    for (std::size_t p = 0; p < cells; ++p) {
        double s = 0.0, g2 = 0.0;
        for (int c = 0; c < d; ++c) {
            s += uv[c][p] * uv[c][p];
            for (int j = 0; j < d; ++j) g2 += gv[c][j][p] * gv[c][j][p];
        }
        sum += ((e == 0.0) ? 1.0 : std::pow(s, e)) * g2;
    }
    return sum * quadrature::cell_measure(d, m);
}

/// || grad |u|^{(r+1)/2} ||_H^2, evaluated pointwise through the chain rule:
/// |grad |u|^{(r+1)/2}|^2 = ((r+1)^2/16) |u|^{r-3} |grad |u|^2|^2.
inline double grad_pow_norm_sq(const SpectralField& u, const AbsorptionExponent& rexp,
                               int quad_points = 0) {
    const int d = u.grid.dim;
    const int m = quad_points ? quad_points : rexp.quad_points(u.grid);
    auto uv = detail::sample_components(u, m);
    auto gv = detail::sample_gradients(u, m);
    const double r = rexp.r;
    const double e = 0.5 * (r - 3.0);
    double sum = 0.0;
    const std::size_t cells = uv[0].size();
    for (std::size_t p = 0; p < cells; ++p) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) s += uv[c][p] * uv[c][p];
        double gs2 = 0.0;  // |grad(|u|^2)|^2, grad_j(|u|^2) = 2 sum_i u_i d_j u_i
        for (int j = 0; j < d; ++j) {
            double gj = 0.0;
            for (int i = 0; i < d; ++i) gj += uv[i][p] * gv[i][j][p];
            gs2 += 4.0 * gj * gj;
        }
        if (s > 0.0)
            sum += std::pow(s, e) * gs2;
        else if (e == 0.0)
            sum += gs2;  // r = 3; grad(|u|^2) vanishes with u anyway
    }
    return sum * quadrature::cell_measure(d, m) * (r + 1.0) * (r + 1.0) / 16.0;
}

/// The three damping quadratures that share one sampling pass:
/// || |u|^{(r-1)/2} grad u ||^2, || grad |u|^{(r+1)/2} ||^2, ||u||_{r+1}^{r+1}.
struct DampingIntegrals {
    double weighted_grad2 = 0.0;
    double grad_pow2 = 0.0;
    double lp_rp1 = 0.0;
};

inline DampingIntegrals damping_integrals(const SpectralField& u, const AbsorptionExponent& rexp,
                                          int quad_points = 0) {
    const int d = u.grid.dim;
    const int m = quad_points ? quad_points : rexp.quad_points(u.grid);
    auto uv = detail::sample_components(u, m);
    auto gv = detail::sample_gradients(u, m);
    const double r = rexp.r;
    const double e1 = 0.5 * (r - 1.0);
    const double e2 = 0.5 * (r - 3.0);
    DampingIntegrals out;
    const std::size_t cells = uv[0].size();
    for (std::size_t p = 0; p < cells; ++p) {
        double s = 0.0, g2 = 0.0;
        for (int c = 0; c < d; ++c) {
            s += uv[c][p] * uv[c][p];
            for (int j = 0; j < d; ++j) g2 += gv[c][j][p] * gv[c][j][p];
        }
        double w1 = (e1 == 0.0) ? 1.0 : (s > 0.0 ? std::pow(s, e1) : 0.0);
        out.weighted_grad2 += w1 * g2;
        out.lp_rp1 += std::pow(s, 0.5 * (r + 1.0));
        double gs2 = 0.0;
        for (int j = 0; j < d; ++j) {
            double gj = 0.0;
            for (int i = 0; i < d; ++i) gj += uv[i][p] * gv[i][j][p];
            gs2 += 4.0 * gj * gj;
        }
        if (s > 0.0)
            out.grad_pow2 += std::pow(s, e2) * gs2;
        else if (e2 == 0.0)
            out.grad_pow2 += gs2;
    }
    double measure = quadrature::cell_measure(d, m);
    out.weighted_grad2 *= measure;
    out.lp_rp1 *= measure;
    out.grad_pow2 *= measure * (r + 1.0) * (r + 1.0) / 16.0;
    return out;
}

/// Right-hand side of the torus equality for (C(u), A u):
/// || |u|^{(r-1)/2} grad u ||^2 + 4 (r-1)/(r+1)^2 || grad |u|^{(r+1)/2} ||^2.
inline double torus_identity_rhs(const SpectralField& u, const AbsorptionExponent& rexp,
                                 int quad_points = 0) {
    DampingIntegrals q = damping_integrals(u, rexp, quad_points);
    double r = rexp.r;
    return q.weighted_grad2 + 4.0 * (r - 1.0) / ((r + 1.0) * (r + 1.0)) * q.grad_pow2;
}

}  // namespace cbf
