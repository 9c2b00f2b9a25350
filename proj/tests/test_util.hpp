#pragma once

#include <array>
#include <functional>

#include "cbf/cbf.hpp"

namespace cbf::testing {

/// Build a field from a pointwise function of x in [0,1)^dim.
inline SpectralField make_field(
    const TorusGrid& grid,
    const std::function<std::array<double, 3>(std::array<double, 3>)>& fn) {
    PhysicalField phys(grid, grid.n);
    const int n = grid.n;
    std::size_t j = 0;
    auto fill = [&](std::array<double, 3> x) {
        std::array<double, 3> v = fn(x);
        for (int c = 0; c < grid.dim; ++c) phys.component(c)[j] = v[c];
        ++j;
    };
    if (grid.dim == 2) {
        for (int i0 = 0; i0 < n; ++i0)
            for (int i1 = 0; i1 < n; ++i1) fill({double(i0) / n, double(i1) / n, 0.0});
    } else {
        for (int i0 = 0; i0 < n; ++i0)
            for (int i1 = 0; i1 < n; ++i1)
                for (int i2 = 0; i2 < n; ++i2)
                    fill({double(i0) / n, double(i1) / n, double(i2) / n});
    }
    return transform(phys);
}

inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

inline double rel_field_diff(const SpectralField& a, const SpectralField& b) {
    return norm_h(a - b) / std::max(norm_h(b), 1e-300);
}

}  // namespace cbf::testing
