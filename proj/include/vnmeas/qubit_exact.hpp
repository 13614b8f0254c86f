// qubit_exact.hpp - exact closed-form qubit solution for arbitrary detector
// states: the oscillation-series coefficients c, s, c_x, s_x, c_p, s_p and
// the exact conditioned detector means assembled from them.
//
// The series use the convention Tr A = 0, A = a_scale·σ3: arbitrary qubit
// observables are brought into that frame by a basis rotation plus trace
// subtraction, and the affine offset is restored in the reported means.

#pragma once

#include "vnmeas/detector.hpp"
#include "vnmeas/errors.hpp"
#include "vnmeas/operators.hpp"
#include "vnmeas/vonneumann.hpp"

namespace vnmeas {

struct QubitSeriesCoefficients {
    double c = 0.0;   // weights <p^{2n}>_0
    double s = 0.0;   // weights <p^{2n-1}>_0
    double c_x = 0.0; // weights <{p^{2n},x}>_0/2
    double s_x = 0.0; // weights <{p^{2n-1},x}>_0/2
    double c_p = 0.0; // weights <p^{2n+1}>_0
    double s_p = 0.0; // weights <p^{2n}>_0
    int truncation_order = 0;
    double a_scale = 0.0;
};

// Sums the six series for argument 2·a_scale·g/ħ until every n-th step falls
// below tol; throws SeriesNotConverged past the cap of 40 steps (detector
// moments growing too fast for the given coupling).
QubitSeriesCoefficients series_coefficients(const DetectorMoments& m, double a_scale,
                                            const CouplingConfig& cfg,
                                            double tol = 1e-12);

// Frame of a qubit observable: A = offset·1 + a_scale·(basis σ3 basis†).
// Rejects observables proportional to the identity (a_scale = 0).
struct QubitObservableFrame {
    Matrix basis;
    double a_scale = 0.0;
    double offset = 0.0;
};
QubitObservableFrame qubit_frame(const Matrix& A);

// Exact conditioned means in the σ3 frame: r is the Bloch vector of ρ_i and
// P_f the post-selection, both already expressed in the frame basis.
ConditionedResponse exact_conditioned_means(const BlochVector& r, const Matrix& P_f,
                                            const QubitSeriesCoefficients& coeffs,
                                            const DetectorMoments& m,
                                            const CouplingConfig& cfg,
                                            double prob_floor = kProbFloor);

// Convenience wrapper: rotates (rho_i, P_f) into the frame of A, applies the
// series, and restores the trace offset g·offset in the position mean.
ConditionedResponse qubit_exact_response(const Matrix& A, const DensityOperator& rho_i,
                                         const Matrix& P_f, const DetectorMoments& m,
                                         const CouplingConfig& cfg, double tol = 1e-12,
                                         double prob_floor = kProbFloor);

// Non-selective channel assembled from (c, s):
// ρ + [(c r1 - s r2)σ1 + (c r2 + s r1)σ2]/2 in the frame basis.
Matrix qubit_nonselective(const BlochVector& r, const QubitSeriesCoefficients& coeffs);

// Tangent of the unitary flow generated by a_scale·σ3 at Bloch point r, in the
// component-rate convention dr/dε = (-2·a_scale·r2, 2·a_scale·r1, 0).
Eigen::Vector3d bloch_vector_field(double a_scale, const BlochVector& r);

} // namespace vnmeas
