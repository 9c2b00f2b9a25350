#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "cbf/field.hpp"
#include "cbf/stokes.hpp"

namespace cbf {

struct NormReport {
    double h_norm = 0.0;
    double v_norm = 0.0;
    double grad_norm = 0.0;
    double da_norm = 0.0;
    double linf_norm = 0.0;
    std::map<double, double> lp_norms;
};

namespace quadrature {

/// Points per axis that integrate pointwise products of total degree q of
/// band-limited n-fields exactly (band |k_i| <= n/2 - 1).
inline int points_for_degree(const TorusGrid& g, int q) {
    int needed = q * (g.n / 2 - 1) + 1;
    return fft::smooth_size(std::max(needed, g.padded_n()));
}

/// Quadrature resolution for an L^p integrand. Even integer p is exact;
/// anything else falls back to an oversampled grid.
inline int points_for_lp(const TorusGrid& g, double p) {
    double pr = std::round(p);
    bool even_integer = std::abs(p - pr) < 1e-12 && static_cast<long>(pr) % 2 == 0;
    if (even_integer) return points_for_degree(g, static_cast<int>(pr));
    return fft::smooth_size(std::max(g.padded_n(), 2 * g.n));
}

/// 1/m^dim (cell measure of the unit torus).
inline double cell_measure(int dim, int m) {
    double w = 1.0;
    for (int i = 0; i < dim; ++i) w /= m;
    return w;
}

}  // namespace quadrature

/// Pointwise Euclidean magnitudes |u(x_j)| on an m^dim collocation grid.
inline std::vector<double> pointwise_magnitude(const PhysicalField& phys) {
    std::vector<double> mag(phys.cells(), 0.0);
    for (int c = 0; c < phys.grid.dim; ++c) {
        const double* comp = phys.component(c);
        for (std::size_t j = 0; j < mag.size(); ++j) mag[j] += comp[j] * comp[j];
    }
    for (double& v : mag) v = std::sqrt(v);
    return mag;
}

/// ||u||_{L^p}^p by collocation quadrature (p >= 1 finite).
inline double lp_norm_pow(const SpectralField& u, double p, int quad_points = 0) {
    if (quad_points == 0) quad_points = quadrature::points_for_lp(u.grid, p);
    PhysicalField phys = inverse_transform(u, quad_points);
    std::vector<double> mag = pointwise_magnitude(phys);
    double sum = 0.0;
    for (double v : mag) sum += std::pow(v, p);
    return sum * quadrature::cell_measure(u.grid.dim, quad_points);
}

inline double lp_norm(const SpectralField& u, double p, int quad_points = 0) {
    return std::pow(lp_norm_pow(u, p, quad_points), 1.0 / p);
}

/// ||u||_infty as the max over padded collocation samples.
inline double linf_norm(const SpectralField& u, int quad_points = 0) {
    if (quad_points == 0) quad_points = u.grid.padded_n();
    PhysicalField phys = inverse_transform(u, quad_points);
    std::vector<double> mag = pointwise_magnitude(phys);
    double mx = 0.0;
    for (double v : mag) mx = std::max(mx, v);
    return mx;
}

inline NormReport norms(const SpectralField& u, const std::vector<double>& lp_exponents = {}) {
    NormReport r;
    double h2 = norm_h_sq(u);
    double g2 = grad_norm_sq(u);
    r.h_norm = std::sqrt(h2);
    r.grad_norm = std::sqrt(g2);
    r.v_norm = std::sqrt(h2 + g2);
    r.da_norm = da_norm(u);
    r.linf_norm = linf_norm(u);
    for (double p : lp_exponents) {
        if (p < 1.0) throw std::invalid_argument("norms: L^p exponent must be >= 1");
        if (std::isinf(p))
            r.lp_norms[p] = r.linf_norm;
        else
            r.lp_norms[p] = lp_norm(u, p);
    }
    return r;
}

}  // namespace cbf
