#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "cbf/fft.hpp"
#include "cbf/grid.hpp"

namespace cbf {

using Complex = std::complex<double>;

/// Divergence-free-capable vector field stored as Fourier coefficients.
/// Layout: component-major, each component an n^dim cube in FFT slot order.
struct SpectralField {
    TorusGrid grid;
    std::vector<Complex> coeffs;
    bool solenoidal = false;

    SpectralField() = default;
    explicit SpectralField(const TorusGrid& g) : grid(g) {
        g.validate();
        coeffs.assign(static_cast<std::size_t>(g.dim) * g.modes(), Complex{0.0, 0.0});
    }

    std::size_t modes() const { return grid.modes(); }

    Complex& at(int comp, std::size_t flat) { return coeffs[comp * modes() + flat]; }
    const Complex& at(int comp, std::size_t flat) const { return coeffs[comp * modes() + flat]; }

    Complex* component(int comp) { return coeffs.data() + comp * modes(); }
    const Complex* component(int comp) const { return coeffs.data() + comp * modes(); }

    bool finite() const {
        for (const Complex& c : coeffs)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
        return true;
    }
};

/// Real point samples of the dim components on an m^dim collocation grid.
struct PhysicalField {
    TorusGrid grid;     // the spectral grid this field resolves
    int points = 0;     // samples per axis (>= grid.n)
    std::vector<double> samples;  // component-major, m^dim each

    PhysicalField() = default;
    PhysicalField(const TorusGrid& g, int m) : grid(g), points(m) {
        std::size_t total = 1;
        for (int i = 0; i < g.dim; ++i) total *= static_cast<std::size_t>(m);
        samples.assign(static_cast<std::size_t>(g.dim) * total, 0.0);
    }

    std::size_t cells() const {
        std::size_t total = 1;
        for (int i = 0; i < grid.dim; ++i) total *= static_cast<std::size_t>(points);
        return total;
    }

    double* component(int comp) { return samples.data() + comp * cells(); }
    const double* component(int comp) const { return samples.data() + comp * cells(); }
};

// ---------------------------------------------------------------------------
// arithmetic
// ---------------------------------------------------------------------------

inline void check_same_grid(const SpectralField& a, const SpectralField& b) {
    if (a.grid != b.grid) throw std::invalid_argument("field grid mismatch");
}

inline SpectralField& operator+=(SpectralField& a, const SpectralField& b) {
    check_same_grid(a, b);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) a.coeffs[i] += b.coeffs[i];
    a.solenoidal = a.solenoidal && b.solenoidal;
    return a;
}

inline SpectralField& operator-=(SpectralField& a, const SpectralField& b) {
    check_same_grid(a, b);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) a.coeffs[i] -= b.coeffs[i];
    a.solenoidal = a.solenoidal && b.solenoidal;
    return a;
}

inline SpectralField& operator*=(SpectralField& a, double s) {
    for (Complex& c : a.coeffs) c *= s;
    return a;
}

inline SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
inline SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
inline SpectralField operator*(double s, SpectralField a) { return a *= s; }

/// H inner product (u, v)_H = int u.v dx, evaluated spectrally.
inline double inner_h(const SpectralField& a, const SpectralField& b) {
    check_same_grid(a, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        sum += a.coeffs[i].real() * b.coeffs[i].real() + a.coeffs[i].imag() * b.coeffs[i].imag();
    return sum;
}

inline double norm_h_sq(const SpectralField& a) {
    double sum = 0.0;
    for (const Complex& c : a.coeffs) sum += std::norm(c);
    return sum;
}

inline double norm_h(const SpectralField& a) { return std::sqrt(norm_h_sq(a)); }

// ---------------------------------------------------------------------------
// transforms
// ---------------------------------------------------------------------------

namespace detail {

/// Spread one component from the n-grid band into an m-grid FFT buffer.
inline void spread_band(const Complex* src, int dim, int n, Complex* dst, int m) {
    const int half = n / 2;  // modes with |k| <= half-1 are populated
    for_each_mode(dim, n, [&](std::size_t flat, const std::array<int, 3>& k) {
        if (std::abs(k[0]) >= half || std::abs(k[1]) >= half ||
            (dim == 3 && std::abs(k[2]) >= half))
            return;  // Nyquist stays zero
        std::size_t dflat = static_cast<std::size_t>(slot(k[0], m));
        dflat = dflat * m + slot(k[1], m);
        if (dim == 3) dflat = dflat * m + slot(k[2], m);
        dst[dflat] = src[flat];
    });
}

/// Gather the n-grid band out of an m-grid FFT buffer (Nyquist zeroed).
inline void gather_band(const Complex* src, int m, Complex* dst, int dim, int n) {
    const int half = n / 2;
    for_each_mode(dim, n, [&](std::size_t flat, const std::array<int, 3>& k) {
        if (std::abs(k[0]) >= half || std::abs(k[1]) >= half ||
            (dim == 3 && std::abs(k[2]) >= half)) {
            dst[flat] = Complex{0.0, 0.0};
            return;
        }
        std::size_t sflat = static_cast<std::size_t>(slot(k[0], m));
        sflat = sflat * m + slot(k[1], m);
        if (dim == 3) sflat = sflat * m + slot(k[2], m);
        dst[flat] = src[sflat];
    });
}

/// Synthesize one spectral component onto m^dim points (complex buffer out).
inline std::vector<Complex> synthesize(const Complex* comp, int dim, int n, int m) {
    std::size_t total = 1;
    for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(m);
    std::vector<Complex> buf(total, Complex{0.0, 0.0});
    spread_band(comp, dim, n, buf.data(), m);
    fft::c2c(buf.data(), dim, m, FFTW_BACKWARD);
    return buf;
}

/// Analyze m^dim point values: forward DFT scaled by 1/m^dim, band gathered
/// onto the n-grid.
inline void analyze(std::vector<Complex>& buf, int dim, int m, Complex* comp, int n) {
    fft::c2c(buf.data(), dim, m, FFTW_FORWARD);
    double scale = 1.0;
    for (int i = 0; i < dim; ++i) scale /= m;
    for (Complex& c : buf) c *= scale;
    gather_band(buf.data(), m, comp, dim, n);
}

}  // namespace detail

/// Evaluate the field at m^dim collocation points (m = 0 means the native n).
inline PhysicalField inverse_transform(const SpectralField& u, int m = 0) {
    if (m == 0) m = u.grid.n;
    if (m < u.grid.n) throw std::invalid_argument("inverse_transform: m < n");
    PhysicalField phys(u.grid, m);
    for (int c = 0; c < u.grid.dim; ++c) {
        std::vector<Complex> buf = detail::synthesize(u.component(c), u.grid.dim, u.grid.n, m);
        double* out = phys.component(c);
        for (std::size_t j = 0; j < buf.size(); ++j) out[j] = buf[j].real();
    }
    return phys;
}

/// Fourier coefficients of point samples, truncated to the grid band.
inline SpectralField transform(const PhysicalField& phys) {
    const TorusGrid& g = phys.grid;
    std::size_t expect = static_cast<std::size_t>(g.dim) * phys.cells();
    if (phys.points < g.n || phys.samples.size() != expect)
        throw std::invalid_argument("transform: sample shape does not match grid");
    SpectralField u(g);
    std::size_t cells = phys.cells();
    for (int c = 0; c < g.dim; ++c) {
        std::vector<Complex> buf(cells);
        const double* in = phys.component(c);
        for (std::size_t j = 0; j < cells; ++j) buf[j] = Complex{in[j], 0.0};
        detail::analyze(buf, g.dim, phys.points, u.component(c), g.n);
    }
    return u;
}

/// Largest |k . u_hat(k)| / ||u||_H over all modes; 0 for the zero field.
inline double divergence_residual(const SpectralField& u) {
    double nrm = norm_h(u);
    if (nrm == 0.0) return 0.0;
    double worst = 0.0;
    for_each_mode(u.grid.dim, u.grid.n, [&](std::size_t flat, const std::array<int, 3>& k) {
        Complex dot{0.0, 0.0};
        for (int c = 0; c < u.grid.dim; ++c) dot += double(k[c]) * u.at(c, flat);
        worst = std::max(worst, std::abs(dot));
    });
    return worst / nrm;
}

/// Largest |u_hat(-k) - conj(u_hat(k))| over all modes, absolute.
inline double hermitian_residual(const SpectralField& u) {
    double worst = 0.0;
    const int n = u.grid.n;
    for_each_mode(u.grid.dim, n, [&](std::size_t flat, const std::array<int, 3>& k) {
        std::size_t nflat = static_cast<std::size_t>(slot(-k[0], n));
        nflat = nflat * n + slot(-k[1], n);
        if (u.grid.dim == 3) nflat = nflat * n + slot(-k[2], n);
        for (int c = 0; c < u.grid.dim; ++c)
            worst = std::max(worst, std::abs(u.at(c, nflat) - std::conj(u.at(c, flat))));
    });
    return worst;
}

}  // namespace cbf
