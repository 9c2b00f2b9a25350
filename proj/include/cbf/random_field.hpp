#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "cbf/field.hpp"
#include "cbf/projection.hpp"

namespace cbf {

/// Deterministic normal sampler: explicit Box-Muller over mt19937_64 so
/// seeded streams are identical across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() {
        return (gen_() >> 11) * 0x1.0p-53;  // [0,1)
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(two_pi * u2);
        have_spare_ = true;
        return mag * std::cos(two_pi * u2);
    }

    std::uint64_t raw() { return gen_(); }

  private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

struct RandomFieldOptions {
    double spectrum_s = 3.0;     // coefficient std ~ |k|^{-s}
    double cutoff_frac = 1.0 / 3.0;  // truncate |k| <= cutoff_frac * n
    bool include_mean = true;    // populate the k = 0 mode
    double amplitude = 1.0;
};

namespace detail {

/// k is the canonical half-space representative (first nonzero entry > 0).
inline bool canonical_mode(const std::array<int, 3>& k) {
    if (k[0] != 0) return k[0] > 0;
    if (k[1] != 0) return k[1] > 0;
    if (k[2] != 0) return k[2] > 0;
    return false;  // k = 0 handled separately
}

}  // namespace detail

/// Seeded smooth random divergence-free field: Gaussian coefficients with
/// spectrum |k|^{-s}, truncated to |k| <= cutoff_frac * n, Hermitian by
/// construction, then Leray-projected.
inline SpectralField random_solenoidal_field(const TorusGrid& grid, std::uint64_t seed,
                                             const RandomFieldOptions& opts = {}) {
    SpectralField u(grid);
    Rng rng(seed);
    const int d = grid.dim;
    const int n = grid.n;
    const double kmax = opts.cutoff_frac * n;

    // draw in fixed mode order for determinism
    for_each_mode(d, n, [&](std::size_t flat, const std::array<int, 3>& k) {
        double kk = std::sqrt(ksq(k));
        if (kk == 0.0) {
            if (opts.include_mean)
                for (int c = 0; c < d; ++c) u.at(c, flat) = Complex{rng.normal(), 0.0};
            return;
        }
        if (!detail::canonical_mode(k) || kk > kmax) return;
        double std_dev = std::pow(kk, -opts.spectrum_s);
        std::size_t nflat = static_cast<std::size_t>(slot(-k[0], n));
        nflat = nflat * n + slot(-k[1], n);
        if (d == 3) nflat = nflat * n + slot(-k[2], n);
        for (int c = 0; c < d; ++c) {
            Complex val{std_dev * rng.normal(), std_dev * rng.normal()};
            u.at(c, flat) = val;
            u.at(c, nflat) = std::conj(val);
        }
    });
    u *= opts.amplitude;
    return leray_project(u);
}

/// Mean-zero variant (k = 0 mode empty), used by A^gamma interpolation checks.
inline SpectralField random_mean_zero_field(const TorusGrid& grid, std::uint64_t seed,
                                            RandomFieldOptions opts = {}) {
    opts.include_mean = false;
    return random_solenoidal_field(grid, seed, opts);
}

/// Seeded gradient field grad(phi) of a smooth random scalar: exactly in the
/// complement of the divergence-free space, so the Leray projection kills it.
inline SpectralField random_gradient_field(const TorusGrid& grid, std::uint64_t seed,
                                           const RandomFieldOptions& opts = {}) {
    SpectralField g(grid);
    Rng rng(seed);
    const int d = grid.dim;
    const int n = grid.n;
    const double kmax = opts.cutoff_frac * n;
    for_each_mode(d, n, [&](std::size_t flat, const std::array<int, 3>& k) {
        double kk = std::sqrt(ksq(k));
        if (kk == 0.0 || kk > kmax || !detail::canonical_mode(k)) return;
        double std_dev = std::pow(kk, -opts.spectrum_s);
        Complex phi{std_dev * rng.normal(), std_dev * rng.normal()};
        std::size_t nflat = static_cast<std::size_t>(slot(-k[0], n));
        nflat = nflat * n + slot(-k[1], n);
        if (d == 3) nflat = nflat * n + slot(-k[2], n);
        for (int c = 0; c < d; ++c) {
            Complex val = Complex{0.0, two_pi * k[c]} * phi;
            g.at(c, flat) = val;
            g.at(c, nflat) = std::conj(val);
        }
    });
    g *= opts.amplitude;
    return g;
}

/// Scale to unit H norm (throws on the zero field).
inline SpectralField normalized_h(SpectralField u) {
    double nrm = norm_h(u);
    if (nrm == 0.0) throw std::invalid_argument("normalized_h: zero field");
    u *= 1.0 / nrm;
    return u;
}

}  // namespace cbf
