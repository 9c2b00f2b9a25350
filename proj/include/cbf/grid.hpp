#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace cbf {

inline constexpr double two_pi = 6.283185307179586476925286766559;

/// Periodic box [0,1)^dim sampled with n modes per axis.
///
/// Wavevector convention: fields are trigonometric polynomials
/// u(x) = sum_k u_hat(k) e^{2 pi i k.x} with k in Z^dim, |k_i| <= n/2.
/// The Nyquist slot k_i = -n/2 is kept identically zero so every stored
/// field has an unambiguous real representation and padded products
/// dealias exactly.
struct TorusGrid {
    int dim = 2;
    int n = 32;
    double pad_factor = 2.0;  // quadrature/dealiasing pad for pointwise products

    void validate() const {
        if (dim != 2 && dim != 3)
            throw std::invalid_argument("TorusGrid: dim must be 2 or 3");
        if (n < 8 || n % 2 != 0)
            throw std::invalid_argument("TorusGrid: n must be even and >= 8");
        if (pad_factor < 1.5)
            throw std::invalid_argument("TorusGrid: pad_factor must be >= 3/2");
        double pn = pad_factor * n;
        if (std::abs(pn - std::round(pn)) > 1e-9)
            throw std::invalid_argument("TorusGrid: pad_factor * n must be integral");
    }

    std::size_t modes() const {
        std::size_t total = 1;
        for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(n);
        return total;
    }

    int padded_n() const { return static_cast<int>(std::round(pad_factor * n)); }

    bool operator==(const TorusGrid& o) const {
        return dim == o.dim && n == o.n && pad_factor == o.pad_factor;
    }
    bool operator!=(const TorusGrid& o) const { return !(*this == o); }
};

/// Signed frequency of FFT slot i on an m-point axis: 0..m/2-1, -m/2..-1.
inline int freq(int i, int m) { return i < (m + 1) / 2 ? i : i - m; }

/// FFT slot of signed frequency k on an m-point axis.
inline int slot(int k, int m) { return k >= 0 ? k : k + m; }

/// Visit every mode of an n^dim cube: f(flat_index, k) with k the signed
/// wavevector (k[2] = 0 in 2D).
template <class F>
inline void for_each_mode(int dim, int n, F&& f) {
    std::array<int, 3> k{0, 0, 0};
    if (dim == 2) {
        std::size_t flat = 0;
        for (int i0 = 0; i0 < n; ++i0) {
            k[0] = freq(i0, n);
            for (int i1 = 0; i1 < n; ++i1, ++flat) {
                k[1] = freq(i1, n);
                f(flat, k);
            }
        }
    } else {
        std::size_t flat = 0;
        for (int i0 = 0; i0 < n; ++i0) {
            k[0] = freq(i0, n);
            for (int i1 = 0; i1 < n; ++i1) {
                k[1] = freq(i1, n);
                for (int i2 = 0; i2 < n; ++i2, ++flat) {
                    k[2] = freq(i2, n);
                    f(flat, k);
                }
            }
        }
    }
}

inline double ksq(const std::array<int, 3>& k) {
    return double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
}

/// Stokes multiplier 4 pi^2 |k|^2 (period-1 torus).
inline double stokes_multiplier(const std::array<int, 3>& k) {
    return two_pi * two_pi * ksq(k);
}

}  // namespace cbf
