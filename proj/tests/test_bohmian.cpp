#include "vnmeas/bohmian.hpp"

#include "doctest.h"
#include "test_util.hpp"

#include <cmath>

using namespace vnmeas;
using testutil::max_abs_diff;

namespace {
const PositionGrid kGrid = default_grid(1.0, 0.0, 512);
}

TEST_CASE("modulated Gaussian: Re p_w = ħk0 and 2Im p_w = ħx/σ²") {
    const double sigma = 1.0, hbar = 1.4, k0 = 0.8;
    const SystemWavefunction1D phi = modulated_gaussian(kGrid, sigma, 0.0, k0, hbar);
    const auto [lo, hi] = central_mass_window(phi, 0.8);

    for (int j = lo; j <= hi; j += 16) {
        const double x = kGrid.point(j);
        const WeakValue wv = momentum_weak_value_at(phi, x);
        CHECK(std::abs(wv.re() - hbar * k0) < 1e-6 * hbar * k0);
        const double expected = hbar * x / (sigma * sigma);
        CHECK(std::abs(wv.two_im() - expected) < 1e-5 * (1.0 + std::abs(expected)));
    }
}

TEST_CASE("real wavefunctions have zero Bohmian momentum") {
    const SystemWavefunction1D phi = modulated_gaussian(kGrid, 0.9, 0.4, 0.0);
    const auto [lo, hi] = central_mass_window(phi, 0.8);
    for (int j = lo; j <= hi; j += 32)
        CHECK(std::abs(momentum_weak_value_at(phi, kGrid.point(j)).re()) < 1e-10);
}

TEST_CASE("nodes raise a degenerate post-selection error") {
    // odd superposition has a node at the origin
    SystemWavefunction1D phi = modulated_gaussian(kGrid, 1.0, 2.0, 0.0);
    const SystemWavefunction1D other = modulated_gaussian(kGrid, 1.0, -2.0, 0.0);
    phi.amplitudes -= other.amplitudes;
    phi.amplitudes /= std::sqrt(phi.norm_squared());
    CHECK_THROWS_AS(momentum_weak_value_at(phi, 0.0), DegeneratePostSelection);
}

TEST_CASE("osmotic velocity field") {
    SUBCASE("Gaussian: v(x) = ħx/2mσ²") {
        const SystemWavefunction1D phi = modulated_gaussian(kGrid, 1.0, 0.0, 0.3);
        const OsmoticVelocityField field = osmotic_velocity_field(phi, 2.0);
        const auto [lo, hi] = central_mass_window(phi, 0.8);
        for (int j = lo; j <= hi; j += 16) {
            REQUIRE(field.valid[j]);
            const double x = kGrid.point(j);
            CHECK(std::abs(field.velocity[j] - x / 4.0) < 1e-5 * (1.0 + std::abs(x)));
        }
    }
    SUBCASE("uniform magnitude gives a vanishing field") {
        // grid-periodic plane wave
        SystemWavefunction1D phi;
        phi.grid = kGrid;
        phi.hbar = 1.0;
        phi.amplitudes.resize(kGrid.n_points);
        const double k0 = 32.0 * kGrid.momentum_step(1.0);
        for (int j = 0; j < kGrid.n_points; ++j)
            phi.amplitudes(j) = std::polar(1.0, k0 * kGrid.point(j));
        phi.amplitudes /= std::sqrt(phi.norm_squared());
        const OsmoticVelocityField field = osmotic_velocity_field(phi, 1.0);
        for (int j = 0; j < kGrid.n_points; j += 64) {
            REQUIRE(field.valid[j]);
            CHECK(std::abs(field.velocity[j]) < 1e-9);
        }
    }
    SUBCASE("field integrates to zero against a symmetric density") {
        const SystemWavefunction1D phi = modulated_gaussian(kGrid, 1.1, 0.0, 0.5);
        const OsmoticVelocityField field = osmotic_velocity_field(phi, 1.0);
        double acc = 0.0;
        for (int j = 0; j < kGrid.n_points; ++j)
            if (field.valid[j])
                acc += field.velocity[j] * std::norm(phi.amplitudes(j)) * kGrid.dx;
        CHECK(std::abs(acc) < 1e-10);
    }
    SUBCASE("gaps are flagged, not fatal") {
        SystemWavefunction1D phi = modulated_gaussian(kGrid, 1.0, 3.0, 0.0);
        const SystemWavefunction1D other = modulated_gaussian(kGrid, 1.0, -3.0, 0.0);
        phi.amplitudes -= other.amplitudes;
        phi.amplitudes /= std::sqrt(phi.norm_squared());
        const OsmoticVelocityField field = osmotic_velocity_field(phi, 1.0);
        CHECK(!field.valid[kGrid.n_points / 2]); // node at the origin
        CHECK(field.valid[kGrid.index_of(3.0)]);
    }
}

TEST_CASE("agreement with the general weak-value machinery on the discrete space") {
    // post-select the momentum operator on a grid cell: identical to the
    // spectral-derivative ratio
    PositionGrid grid;
    grid.n_points = 128;
    grid.dx = 24.0 / 128;
    grid.center = 0.0;
    const double hbar = 1.3, k0 = 0.6;
    const SystemWavefunction1D phi = modulated_gaussian(grid, 1.2, 0.3, k0, hbar);

    const Matrix p_op = momentum_operator_matrix(grid, hbar);
    CHECK(is_hermitian(p_op, 1e-10));

    Vector v = phi.amplitudes * std::sqrt(grid.dx); // unit-norm discrete vector
    const DensityOperator rho = DensityOperator::pure(v);

    const auto [lo, hi] = central_mass_window(phi, 0.8);
    for (int j = lo; j <= hi; j += 24) {
        Matrix cell = Matrix::Zero(grid.n_points, grid.n_points);
        cell(j, j) = 1.0;
        const WeakValue general = weak_value(p_op, rho, cell);
        const WeakValue direct = momentum_weak_value_at(phi, grid.point(j));
        CHECK(std::abs(general.value - direct.value) <
              1e-6 * (1.0 + std::abs(direct.value)));
        CHECK(general.post_prob == doctest::Approx(direct.post_prob).epsilon(1e-10));
    }
}

TEST_CASE("2Im p_w equals -ħ ∂_x ln ρ by an independent spectral route") {
    const double hbar = 1.0;
    const SystemWavefunction1D phi = modulated_gaussian(kGrid, 1.0, 0.5, 0.7, hbar);

    // spectral derivative of the density ρ = |φ|², reusing the detector
    // transform on a raw array
    Vector density(kGrid.n_points);
    for (int j = 0; j < kGrid.n_points; ++j)
        density(j) = std::norm(phi.amplitudes(j));
    Vector mom = position_to_momentum(kGrid, density, hbar);
    for (int k = 0; k < kGrid.n_points; ++k)
        mom(k) *= kGrid.momentum(k, hbar) * kImag / hbar; // ∂_x = i p̂/ħ
    const Vector d_density = momentum_to_position(kGrid, mom, hbar);

    const auto [lo, hi] = central_mass_window(phi, 0.8);
    for (int j = lo; j <= hi; j += 16) {
        const WeakValue wv = momentum_weak_value_at(phi, kGrid.point(j));
        const double log_deriv = d_density(j).real() / density(j).real();
        CHECK(std::abs(wv.two_im() - (-hbar * log_deriv)) < 1e-8 * (1.0 + std::abs(log_deriv)));
    }
}
