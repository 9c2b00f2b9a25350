#include <catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace cbf;
using cbf::testing::make_field;
using cbf::testing::rel_diff;
using cbf::testing::rel_field_diff;

namespace {
const TorusGrid grid16{2, 16, 2.0};
const TorusGrid grid32{2, 32, 2.0};

SpectralField sin_x1_field(const TorusGrid& g) {
    return make_field(g, [](std::array<double, 3> x) {
        return std::array<double, 3>{std::sin(two_pi * x[0]), 0.0, 0.0};
    });
}
}  // namespace

TEST_CASE("single-mode field transforms to exactly two modes") {
    SpectralField u = sin_x1_field(grid16);
    int nonzero = 0;
    for_each_mode(2, 16, [&](std::size_t flat, const std::array<int, 3>& k) {
        for (int c = 0; c < 2; ++c) {
            Complex v = u.at(c, flat);
            if (std::abs(v) > 1e-12) {
                ++nonzero;
                REQUIRE(c == 0);
                REQUIRE(std::abs(k[0]) == 1);
                REQUIRE(k[1] == 0);
                // sin(2 pi x) = (e^{i2pix} - e^{-i2pix}) / (2i)
                Complex expect = k[0] == 1 ? Complex{0.0, -0.5} : Complex{0.0, 0.5};
                REQUIRE(std::abs(v - expect) < 1e-14);
            }
        }
    });
    REQUIRE(nonzero == 2);
}

TEST_CASE("transform round trip is the identity") {
    SpectralField u = random_solenoidal_field(grid16, 42);
    PhysicalField phys = inverse_transform(u);
    SpectralField back = transform(phys);
    REQUIRE(rel_field_diff(back, u) < 1e-12);

    PhysicalField phys2 = inverse_transform(back);
    double worst = 0.0;
    for (std::size_t j = 0; j < phys.samples.size(); ++j)
        worst = std::max(worst, std::abs(phys.samples[j] - phys2.samples[j]));
    REQUIRE(worst < 1e-12);
}

TEST_CASE("transform rejects mismatched shapes") {
    PhysicalField phys(grid16, 16);
    phys.samples.pop_back();
    REQUIRE_THROWS_AS(transform(phys), std::invalid_argument);
}

TEST_CASE("Parseval: physical quadrature equals the spectral sum") {
    SpectralField u = random_solenoidal_field(grid32, 7);
    PhysicalField phys = inverse_transform(u);
    double quad = 0.0;
    for (double s : phys.samples) quad += s * s;
    quad /= double(phys.cells());
    REQUIRE(rel_diff(quad, norm_h_sq(u)) < 1e-12);
    // independent code path through the L^p machinery
    REQUIRE(rel_diff(lp_norm(u, 2.0), norm_h(u)) < 1e-10);
}

TEST_CASE("random fields are Hermitian and divergence-free") {
    for (std::uint64_t seed : {1, 2, 3}) {
        SpectralField u = random_solenoidal_field(grid32, seed);
        REQUIRE(hermitian_residual(u) == 0.0);
        REQUIRE(divergence_residual(u) < 1e-12);
    }
    TorusGrid g3{3, 16, 2.0};
    SpectralField u3 = random_solenoidal_field(g3, 4);
    REQUIRE(hermitian_residual(u3) == 0.0);
    REQUIRE(divergence_residual(u3) < 1e-12);
}

TEST_CASE("leray projection annihilates gradient fields") {
    // grad phi with phi = sin(2 pi x1)
    SpectralField g = make_field(grid16, [](std::array<double, 3> x) {
        return std::array<double, 3>{two_pi * std::cos(two_pi * x[0]), 0.0, 0.0};
    });
    SpectralField pg = leray_project(g);
    REQUIRE(norm_h(pg) < 1e-12 * norm_h(g));

    SpectralField rg = random_gradient_field(grid32, 11);
    REQUIRE(norm_h(leray_project(rg)) < 1e-12 * norm_h(rg));
}

TEST_CASE("leray projection fixes divergence-free and constant fields") {
    SpectralField tg = make_field(grid16, [](std::array<double, 3> x) {
        return std::array<double, 3>{std::sin(two_pi * x[0]) * std::cos(two_pi * x[1]),
                                     -std::cos(two_pi * x[0]) * std::sin(two_pi * x[1]), 0.0};
    });
    REQUIRE(rel_field_diff(leray_project(tg), tg) < 1e-13);

    SpectralField c = make_field(grid16, [](std::array<double, 3>) {
        return std::array<double, 3>{0.7, -1.3, 0.0};
    });
    REQUIRE(rel_field_diff(leray_project(c), c) < 1e-13);
}

TEST_CASE("projection is idempotent and self-adjoint over 200 seeded pairs") {
    double worst_idem = 0.0, worst_adj = 0.0, worst_div = 0.0;
    for (int i = 0; i < 200; ++i) {
        SpectralField a =
            random_solenoidal_field(grid32, 100 + i) + random_gradient_field(grid32, 300 + i);
        SpectralField b =
            random_solenoidal_field(grid32, 500 + i) + random_gradient_field(grid32, 700 + i);
        SpectralField pa = leray_project(a);
        worst_idem = std::max(worst_idem, rel_field_diff(leray_project(pa), pa));
        worst_adj = std::max(worst_adj, std::abs(inner_h(pa, b) - inner_h(a, leray_project(b))) /
                                            (norm_h(a) * norm_h(b)));
        worst_div = std::max(worst_div, divergence_residual(pa));
    }
    REQUIRE(worst_idem < 1e-10);
    REQUIRE(worst_adj < 1e-10);
    REQUIRE(worst_div < 1e-12);
}

TEST_CASE("stokes operator on eigenfunctions") {
    SpectralField u = make_field(grid16, [](std::array<double, 3> x) {
        return std::array<double, 3>{std::sin(two_pi * x[1]), 0.0, 0.0};
    });
    SpectralField au = stokes_apply(u);
    SpectralField expect = u;
    expect *= two_pi * two_pi;  // 4 pi^2 |k|^2 with |k| = 1
    REQUIRE(rel_field_diff(au, expect) < 1e-13);

    SpectralField c = make_field(grid16, [](std::array<double, 3>) {
        return std::array<double, 3>{1.0, 2.0, 0.0};
    });
    REQUIRE(norm_h(stokes_apply(c)) == 0.0);
}

TEST_CASE("||A^{1/2} u|| equals the directly differentiated gradient norm") {
    SpectralField u = random_solenoidal_field(grid32, 13);
    double direct = 0.0;
    for (int axis = 0; axis < 2; ++axis) direct += norm_h_sq(partial_derivative(u, axis));
    REQUIRE(rel_diff(std::sqrt(direct), std::sqrt(stokes_norm_sq(u, 0.5))) < 1e-12);
    REQUIRE(rel_diff(direct, grad_norm_sq(u)) < 1e-12);
}

TEST_CASE("ipa_solve inverts I + A") {
    SpectralField c = make_field(grid16, [](std::array<double, 3>) {
        return std::array<double, 3>{0.3, 0.0, 0.0};
    });
    REQUIRE(rel_field_diff(ipa_solve(c), c) < 1e-14);  // eigenvalue 1 on constants

    SpectralField u = sin_x1_field(grid16);
    SpectralField expect = u;
    expect *= 1.0 / (1.0 + two_pi * two_pi);
    REQUIRE(rel_field_diff(ipa_solve(u), expect) < 1e-13);

    SpectralField w = random_solenoidal_field(grid32, 21);
    REQUIRE(rel_field_diff(ipa_solve(ipa_apply(w)), w) < 1e-12);
    REQUIRE(rel_field_diff(ipa_apply(ipa_solve(w)), w) < 1e-12);
}

TEST_CASE("norms of the single-mode field match the closed forms") {
    SpectralField u = sin_x1_field(grid32);
    NormReport r = norms(u, {2.0, 4.0});

    // independent oracle: dense 1D quadrature of sin^2 and sin^4
    const int nq = 200000;
    double s2 = 0.0, s4 = 0.0;
    for (int i = 0; i < nq; ++i) {
        double s = std::sin(two_pi * (i + 0.5) / nq);
        s2 += s * s;
        s4 += s * s * s * s;
    }
    s2 /= nq;
    s4 /= nq;
    REQUIRE(rel_diff(s2, 0.5) < 1e-9);
    REQUIRE(rel_diff(s4, 3.0 / 8.0) < 1e-9);

    REQUIRE(rel_diff(r.h_norm * r.h_norm, 0.5) < 1e-12);
    REQUIRE(rel_diff(r.grad_norm * r.grad_norm, 0.5 * two_pi * two_pi) < 1e-12);
    REQUIRE(rel_diff(std::pow(r.lp_norms.at(4.0), 4.0), 3.0 / 8.0) < 1e-12);
    REQUIRE(rel_diff(r.v_norm * r.v_norm, r.h_norm * r.h_norm + r.grad_norm * r.grad_norm) <
            1e-12);
    REQUIRE(rel_diff(r.linf_norm, 1.0) < 1e-12);
}

TEST_CASE("norms of the zero field vanish") {
    NormReport r = norms(SpectralField(grid16), {2.0, 4.0});
    REQUIRE(r.h_norm == 0.0);
    REQUIRE(r.v_norm == 0.0);
    REQUIRE(r.grad_norm == 0.0);
    REQUIRE(r.da_norm == 0.0);
    REQUIRE(r.linf_norm == 0.0);
    REQUIRE(r.lp_norms.at(4.0) == 0.0);
}

TEST_CASE("A^gamma interpolation inequality on mean-zero fields") {
    double worst = -1e300;
    for (int i = 0; i < 100; ++i) {
        SpectralField z = random_mean_zero_field(grid32, 900 + i);
        double lhs = std::sqrt(stokes_norm_sq(z, 1.0));
        double rhs = std::sqrt(std::sqrt(stokes_norm_sq(z, 0.5)) *
                               std::sqrt(stokes_norm_sq(z, 1.5)));
        worst = std::max(worst, lhs - rhs);
    }
    REQUIRE(worst <= 1e-10);
}

TEST_CASE("Agmon ratio stays bounded over 500 random smooth fields") {
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
        SpectralField u = normalized_h(random_solenoidal_field(grid32, 4000 + i));
        double d4 = grid32.dim / 4.0;
        double ratio =
            linf_norm(u) / (std::pow(norm_h(u), 1.0 - d4) * std::pow(da_norm(u), d4));
        REQUIRE(std::isfinite(ratio));
        worst = std::max(worst, ratio);
    }
    INFO("empirical Agmon constant " << worst);
    REQUIRE(worst > 0.0);
    REQUIRE(worst < 10.0);
}
