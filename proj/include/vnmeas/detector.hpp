// detector.hpp - discretized 1-D continuous detector: position-grid
// wavefunctions, momentum representation, and the moments <p^n>_0 and
// <{p^n,x}>_0/2 that drive the perturbative expansions.
//
// Conventions shared by every module:
//   position grid   x_j = center + (j - n/2)·dx,          j = 0..n-1
//   conjugate grid  p_k = (k - n/2)·dp,  dp = 2πħ/(n·dx), k = 0..n-1
//   transforms use the unitary kernel (2πħ)^{-1/2} e^{∓ipx/ħ}, so
//   Σ|ψ|²dx = Σ|ψ̃|²dp exactly.

#pragma once

#include "vnmeas/operators.hpp"

#include <vector>

namespace vnmeas {

struct PositionGrid {
    int n_points = 0;
    double dx = 0.0;
    double center = 0.0;

    double extent() const { return n_points * dx; }
    double point(int j) const { return center + (j - n_points / 2) * dx; }
    double min() const { return point(0); }

    double momentum_step(double hbar) const;
    double momentum(int k, double hbar) const;
    double momentum_min(double hbar) const { return momentum(0, hbar); }

    // Nearest grid index for x; throws if x is off-grid beyond dx·1e-6.
    int index_of(double x) const;
    // Nearest conjugate-grid index for p; throws if off-grid.
    int momentum_index_of(double p, double hbar) const;

    void validate() const; // n_points >= 16 and even, dx > 0
};

// Default grid for a detector of width sigma whose wavepackets may be
// translated by up to max_shift = |g|·max|eig(A)|. The clearance keeps the
// 1e-12 edge guard satisfiable for Gaussian tails under every shift.
PositionGrid default_grid(double sigma, double max_shift = 0.0, int n_points = 1024);

struct DetectorWavefunction {
    PositionGrid grid;
    Vector amplitudes; // length n_points, units length^{-1/2}
    double hbar = 1.0;

    double norm_squared() const; // Σ|ψ|²dx
};

struct MomentumAmplitudes {
    PositionGrid grid; // the originating position grid
    Vector amplitudes; // ψ̃(p_k)
    double hbar = 1.0;

    double dp() const { return grid.momentum_step(hbar); }
    double point(int k) const { return grid.momentum(k, hbar); }
    double norm_squared() const; // Σ|ψ̃|²dp
};

// ψ(x) = (2πσ²)^{-1/4} exp(ip0(x-x0)/ħ - (x-x0)²/4σ²), renormalized on the grid.
DetectorWavefunction gaussian_state(const PositionGrid& grid, double sigma,
                                    double x0 = 0.0, double p0 = 0.0,
                                    double hbar = 1.0);

MomentumAmplitudes momentum_representation(const DetectorWavefunction& psi);
DetectorWavefunction position_representation(const MomentumAmplitudes& mom);

// Raw unitary transforms between the grid representations; building blocks
// for modules that carry several amplitude arrays over one grid.
Vector position_to_momentum(const PositionGrid& grid, const Vector& amps, double hbar);
Vector momentum_to_position(const PositionGrid& grid, const Vector& amps, double hbar);

// ψ(x - shift), exact translation via a momentum-space phase.
Vector translated(const DetectorWavefunction& psi, double shift);
Vector translated(const PositionGrid& grid, const Vector& amps, double hbar, double shift);

// (p̂^n ψ)(x) by spectral (Fourier) differentiation.
Vector momentum_power_applied(const DetectorWavefunction& psi, int n);

// Band-limited refinement onto 2n points with spacing dx/2 (same extent).
DetectorWavefunction upsampled2(const DetectorWavefunction& psi);

// Throws WrapGuardViolation if |amplitude| >= threshold anywhere in the outer
// 5% of the grid (2.5% per edge).
void check_wrap_guard(const PositionGrid& grid, const Vector& amplitudes,
                      double threshold = 1e-12);

struct DetectorMoments {
    double mean_x = 0.0;
    double mean_p = 0.0;
    std::vector<double> p_moments;   // [n] = <p^n>_0,      n = 0..max_n
    std::vector<double> sym_moments; // [n] = <{p^n,x}>_0/2, n = 0..max_n

    int max_order() const { return static_cast<int>(p_moments.size()) - 1; }
};

// Grid moments via the momentum representation and spectral derivatives.
// max_n <= 8; with check_resolution the computation is repeated on an
// extent-doubled grid and a relative drift above 1e-4 is an error.
DetectorMoments moments(const DetectorWavefunction& psi, int max_n,
                        bool check_resolution = true);

// Closed-form moments of the Gaussian state, valid to any order:
// central <p^{2n}>_0 = (ħ/2σ)^{2n}(2n-1)!!, odd central moments vanish,
// <{p^n,x}>_0/2 = x0·<p^n>_0.
DetectorMoments gaussian_moments(double sigma, double hbar, int max_n,
                                 double x0 = 0.0, double p0 = 0.0);

} // namespace vnmeas
