// gaussian_exact.hpp - closed forms specific to zero-mean Gaussian detectors:
// pure Lindblad dephasing in the eigenbasis of A and conditioned means
// parametrized, to all orders in g, by one weak value of the dephased state.

#pragma once

#include "vnmeas/errors.hpp"
#include "vnmeas/operators.hpp"
#include "vnmeas/vonneumann.hpp"
#include "vnmeas/weak_values.hpp"

namespace vnmeas {

// Detector parameters with the dephasing strength ε = (g/2σ)² kept consistent
// by construction when either g or σ is swept.
struct DecoherenceParams {
    double g = 0.0;
    double sigma = 1.0;
    double hbar = 1.0;

    double epsilon() const { return (g / (2.0 * sigma)) * (g / (2.0 * sigma)); }
};

// L[A](ρ) = AρA† - {ρ, A†A}/2; trace-annihilating.
Matrix lindblad_map(const Matrix& A, const Matrix& rho);

// exp(ε·L[A])(ρ): matrix element (a,b) in the eigenbasis of A is damped by
// exp(-ε(a-b)²/2). Exact, O(d²), manifestly completely positive.
DensityOperator decohered_state(const Matrix& A, const DensityOperator& rho_i,
                                double eps);

// A_w(ε) = Tr[P_f A ρ_i(ε)] / Tr[P_f ρ_i(ε)].
WeakValue decohered_weak_value(const Matrix& A, const DensityOperator& rho_i,
                               const Matrix& P_f, double eps,
                               double prob_floor = kProbFloor);

// <x>_f = g·Re A_w(ε),  <p>_f = (g/ħ)(ħ²/4σ²)·(2 Im A_w(ε)).
ConditionedResponse gaussian_conditioned_means(const Matrix& A,
                                               const DensityOperator& rho_i,
                                               const Matrix& P_f,
                                               const DecoherenceParams& params,
                                               double prob_floor = kProbFloor);

} // namespace vnmeas
