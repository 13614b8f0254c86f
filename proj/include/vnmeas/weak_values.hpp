// weak_values.hpp - generalized complex weak values, the logarithmic
// directional-derivative identity, linear response, and the retrodictive form.

#pragma once

#include "vnmeas/detector.hpp"
#include "vnmeas/errors.hpp"
#include "vnmeas/operators.hpp"
#include "vnmeas/vonneumann.hpp"

namespace vnmeas {

struct WeakValue {
    Complex value;          // units of A
    double post_prob = 0.0; // Tr[P_f ρ_i], in (0,1]

    double re() const { return value.real(); }
    double two_im() const { return 2.0 * value.imag(); }
};

// A_w = Tr[P_f A ρ_i] / Tr[P_f ρ_i]. The real and imaginary parts satisfy the
// anticommutator/commutator split by construction; the implementation asserts
// this internally.
WeakValue weak_value(const Matrix& A, const DensityOperator& rho_i, const Matrix& P_f,
                     double prob_floor = kProbFloor);

enum class DerivativeMode { Analytic, FiniteDifference };

// ∂_ε ln Tr[P_f e^{-iεA} ρ_i e^{iεA}]|_0. Analytic mode returns 2·Im A_w;
// finite-difference mode differentiates the post-selection probability along
// the flow with a central stencil.
double log_directional_derivative(const Matrix& A, const DensityOperator& rho_i,
                                  const Matrix& P_f,
                                  DerivativeMode mode = DerivativeMode::Analytic,
                                  double step = 1e-5, double prob_floor = kProbFloor);

struct LinearResponsePrediction {
    double mean_x = 0.0;
    double mean_p = 0.0;
    // coefficients the prediction was assembled from
    double mean_x0 = 0.0;
    double mean_p0 = 0.0;
    double sym_px = 0.0; // <{p,x}>_0/2
    double p_squared = 0.0;
    double g = 0.0;
    double hbar = 1.0;
};

// First order in g:
//   <x>_f = <x>_0 + (g/ħ)·(<{p,x}>_0/2)·(2 Im A_w) + g·Re A_w
//   <p>_f = <p>_0 + (g/ħ)·<p²>_0·(2 Im A_w)
LinearResponsePrediction linear_response(const Matrix& A, const DensityOperator& rho_i,
                                         const Matrix& P_f, const DetectorMoments& m,
                                         const CouplingConfig& cfg,
                                         double prob_floor = kProbFloor);

// Identical complex value computed through ρ_f = P_f / Tr[P_f]; the
// normalization cancels in the ratio.
WeakValue retrodictive_weak_value(const Matrix& A, const DensityOperator& rho_i,
                                  const Matrix& P_f, double prob_floor = kProbFloor);

} // namespace vnmeas
