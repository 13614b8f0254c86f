// bohmian.cpp

#include "vnmeas/bohmian.hpp"

#include <cmath>
#include <numbers>

namespace vnmeas {

SystemWavefunction1D modulated_gaussian(const PositionGrid& grid, double sigma,
                                        double x0, double k0, double hbar) {
    grid.validate();
    if (!(sigma >= 3.0 * grid.dx))
        throw std::invalid_argument("modulated_gaussian: sigma under-resolved (< 3 dx)");
    SystemWavefunction1D phi;
    phi.grid = grid;
    phi.hbar = hbar;
    phi.amplitudes.resize(grid.n_points);
    for (int j = 0; j < grid.n_points; ++j) {
        const double u = grid.point(j) - x0;
        phi.amplitudes(j) = std::exp(Complex(-u * u / (4.0 * sigma * sigma), k0 * u));
    }
    phi.amplitudes /= std::sqrt(phi.norm_squared());
    return phi;
}

namespace {

Vector spectral_derivative(const SystemWavefunction1D& phi) {
    Vector mom = position_to_momentum(phi.grid, phi.amplitudes, phi.hbar);
    for (int k = 0; k < phi.grid.n_points; ++k)
        mom(k) *= phi.grid.momentum(k, phi.hbar); // (p̂ φ)(x) = -iħ ∂_x φ
    return momentum_to_position(phi.grid, mom, phi.hbar);
}

} // namespace

WeakValue momentum_weak_value_at(const SystemWavefunction1D& phi, double x,
                                 double mag_floor) {
    if (std::abs(phi.norm_squared() - 1.0) > 1e-10)
        throw std::invalid_argument("momentum_weak_value_at: state not normalized");
    const int j = phi.grid.index_of(x);
    const Complex amp = phi.amplitudes(j);
    if (std::abs(amp) <= mag_floor)
        throw DegeneratePostSelection(
            "momentum_weak_value_at: wavefunction node at the post-selected point");
    const Vector p_phi = spectral_derivative(phi);
    return {p_phi(j) / amp, std::norm(amp) * phi.grid.dx};
}

OsmoticVelocityField osmotic_velocity_field(const SystemWavefunction1D& phi,
                                            double mass, double mag_floor) {
    if (!(mass > 0.0))
        throw std::invalid_argument("osmotic_velocity_field: mass must be > 0");
    const Vector p_phi = spectral_derivative(phi);
    const int n = phi.grid.n_points;
    OsmoticVelocityField field;
    field.velocity.assign(n, 0.0);
    field.valid.assign(n, 0);
    for (int j = 0; j < n; ++j) {
        const Complex amp = phi.amplitudes(j);
        if (std::abs(amp) <= mag_floor) continue;
        field.velocity[j] = (p_phi(j) / amp).imag() / mass;
        field.valid[j] = 1;
    }
    return field;
}

Matrix momentum_operator_matrix(const PositionGrid& grid, double hbar) {
    grid.validate();
    const int n = grid.n_points;
    const double dx = grid.dx;
    const double dp = grid.momentum_step(hbar);
    const double scale = std::sqrt(dx * dp / (2.0 * std::numbers::pi * hbar));

    // unitary DFT on √dx-weighted vectors: V_{kj} = scale·e^{-i p_k x_j/ħ}
    Matrix v(n, n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            v(k, j) = scale * std::polar(1.0, -grid.momentum(k, hbar) * grid.point(j) / hbar);

    Vector diag(n);
    for (int k = 0; k < n; ++k) diag(k) = grid.momentum(k, hbar);
    return v.adjoint() * diag.asDiagonal() * v;
}

std::pair<int, int> central_mass_window(const SystemWavefunction1D& phi,
                                        double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("central_mass_window: fraction must be in (0,1]");
    const int n = phi.grid.n_points;
    const double tail = (1.0 - fraction) / 2.0;
    double cum = 0.0;
    int lo = 0, hi = n - 1;
    for (int j = 0; j < n; ++j) {
        cum += std::norm(phi.amplitudes(j)) * phi.grid.dx;
        if (cum < tail) lo = j + 1;
        if (cum <= 1.0 - tail) hi = j;
    }
    return {lo, hi};
}

} // namespace vnmeas
