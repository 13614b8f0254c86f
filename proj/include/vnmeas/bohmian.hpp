// bohmian.hpp - momentum weak value post-selected on position for a 1-D
// system wavefunction: Bohmian momentum (real part) and the osmotic velocity
// field (imaginary part scaled by 1/m).

#pragma once

#include "vnmeas/detector.hpp"
#include "vnmeas/errors.hpp"
#include "vnmeas/operators.hpp"
#include "vnmeas/weak_values.hpp"

#include <vector>

namespace vnmeas {

struct SystemWavefunction1D {
    PositionGrid grid;
    Vector amplitudes; // Σ|φ|²dx = 1
    double hbar = 1.0;

    double norm_squared() const { return amplitudes.squaredNorm() * grid.dx; }
};

// φ ∝ exp(ik0 x)·exp(-(x-x0)²/4σ²), normalized on the grid.
SystemWavefunction1D modulated_gaussian(const PositionGrid& grid, double sigma,
                                        double x0, double k0, double hbar = 1.0);

// p_w(x) = -iħ (∂_x φ)(x)/φ(x) by spectral derivative; Re = ħ∂_xS (Bohmian
// momentum), Im = -ħ∂_x ln r. post_prob is the probability mass |φ(x)|²dx of
// the post-selected grid cell. Throws at nodes (|φ| < mag_floor).
WeakValue momentum_weak_value_at(const SystemWavefunction1D& phi, double x,
                                 double mag_floor = 1e-8);

// (1/m)·Im p_w over the whole grid = -(ħ/2m)∂_x ln ρ(x). Points with |φ|
// below mag_floor are gaps (valid = 0), not errors.
struct OsmoticVelocityField {
    std::vector<double> velocity;
    std::vector<uint8_t> valid;
};
OsmoticVelocityField osmotic_velocity_field(const SystemWavefunction1D& phi,
                                            double mass, double mag_floor = 1e-8);

// Dense momentum operator on the discretized space of √dx-weighted amplitude
// vectors; lets the general weak-value machinery act on grid wavefunctions.
Matrix momentum_operator_matrix(const PositionGrid& grid, double hbar);

// Index window holding the central `fraction` of the probability mass.
std::pair<int, int> central_mass_window(const SystemWavefunction1D& phi,
                                        double fraction = 0.8);

} // namespace vnmeas
