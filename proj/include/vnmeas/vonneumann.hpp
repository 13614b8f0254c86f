// vonneumann.hpp - exact joint-state simulation of the impulsive coupling
// U = exp(-i g A⊗p̂/ħ) and every operational object derived from it: Kraus
// operators, POVMs, the Wigner quasi-probability operator, joint and
// conditioned outcome statistics, and the non-selective / averaging maps.
// This module is the brute-force reference for all closed-form modules.
//
// In the eigenbasis of A each system branch's detector wavefunction is
// translated by g·a (momentum-space phase; impulsive coupling is exactly
// solvable, no integrator). Mixed initial system states are handled as a
// spectral ensemble of pure joint states.

#pragma once

#include "vnmeas/detector.hpp"
#include "vnmeas/errors.hpp"
#include "vnmeas/operators.hpp"

#include <utility>
#include <vector>

namespace vnmeas {

struct CouplingConfig {
    double g = 0.0;    // units: length per unit of A
    double hbar = 1.0; // must match the detector state's hbar
};

struct EnsembleMember {
    double weight;             // spectral weight of rho_i (weights sum to 1)
    Eigen::MatrixXcd amplitudes; // system_dim × n_points, Σ|·|²dx = 1
};

struct JointState {
    int system_dim = 0;
    PositionGrid grid;
    double hbar = 1.0;
    std::vector<EnsembleMember> members;
};

JointState evolve_joint(const DensityOperator& rho_i, const DetectorWavefunction& psi,
                        const Matrix& A, const CouplingConfig& cfg);

// p(x,f) and p(p,f) rows of the evolved state against a fixed operator P_f.
struct OutcomeDensities {
    std::vector<double> position; // p(x_j, f), density in x
    std::vector<double> momentum; // p(p_k, f), density in p
    double dx = 0.0;
    double dp = 0.0;
};
OutcomeDensities joint_outcome_densities(const JointState& joint, const Matrix& P_f);

struct ConditionedResponse {
    double mean_x = 0.0;
    double mean_p = 0.0;
    double post_prob = 0.0;
};

// Exact conditioned detector means by direct quadrature of p(x,f), p(p,f).
ConditionedResponse conditioned_response(const DensityOperator& rho_i,
                                         const DetectorWavefunction& psi,
                                         const Matrix& A, const Matrix& P_f,
                                         const CouplingConfig& cfg,
                                         double prob_floor = kProbFloor);

// Same means evaluated through the time-reversed picture: the adjoint maps
// acting on the retrodictive state P_f / Tr[P_f].
ConditionedResponse retrodictive_response(const DensityOperator& rho_i,
                                          const DetectorWavefunction& psi,
                                          const Matrix& A, const Matrix& P_f,
                                          const CouplingConfig& cfg,
                                          double prob_floor = kProbFloor);

// --------------------------- Kraus / POVM layer -----------------------------

// M_x = ψ(x - gA) by spectral calculus of A; x must lie on the grid.
Matrix kraus_position(const DetectorWavefunction& psi, const Matrix& A,
                      const CouplingConfig& cfg, double x);

// E_x = M_x† M_x.
Matrix povm_position(const DetectorWavefunction& psi, const Matrix& A,
                     const CouplingConfig& cfg, double x);

// N_p = exp(-i g p A/ħ)·ψ̃(p); p must lie on the conjugate grid.
Matrix kraus_momentum(const DetectorWavefunction& psi, const Matrix& A,
                      const CouplingConfig& cfg, double p);

// F_p = N_p† N_p = |ψ̃(p)|²·1.
Matrix povm_momentum(const DetectorWavefunction& psi, const Matrix& A,
                     const CouplingConfig& cfg, double p);

// W_{x,p} = (1/πħ)∫dy e^{2ipy/ħ} M†_{x+y} M_{x-y}, quadrature on a 2x-refined
// grid so the y-sampling resolves the full momentum band.
Matrix wigner_operator(const DetectorWavefunction& psi, const Matrix& A,
                       const CouplingConfig& cfg, double x, double p);

// Σ_x v(x_j)·E_{x_j}·dx for arbitrary assigned values v.
Matrix povm_position_weighted_sum(const DetectorWavefunction& psi, const Matrix& A,
                                  const CouplingConfig& cfg,
                                  const std::vector<double>& values);

// Σ_x ((x-<x>_0)/g)·E_x·dx; reconstructs A itself. Requires g ≠ 0.
Matrix contextual_values_reconstruction(const DetectorWavefunction& psi,
                                        const Matrix& A, const CouplingConfig& cfg);

// --------------------------- channel layer ----------------------------------

// Non-selective measurement channel ρ ↦ Tr_d[U (ρ⊗|ψ><ψ|) U†].
DensityOperator nonselective_map(const DensityOperator& rho_i,
                                 const DetectorWavefunction& psi, const Matrix& A,
                                 const CouplingConfig& cfg);

// Linear extension of the channel to arbitrary operators.
Matrix nonselective_apply(const Matrix& op, const DetectorWavefunction& psi,
                          const Matrix& A, const CouplingConfig& cfg);

struct AveragingMaps {
    Matrix x_total;    // Tr_d[(1⊗x̂) U (ρ⊗|ψ><ψ|) U†]
    Matrix p_total;    // Tr_d[(1⊗p̂) U (ρ⊗|ψ><ψ|) U†]
    Matrix x_detector; // x_total - g·E({A,ρ}/2): correlation with the initial detector
    Matrix p_detector; // equals p_total
};
AveragingMaps averaging_maps(const DensityOperator& rho_i,
                             const DetectorWavefunction& psi, const Matrix& A,
                             const CouplingConfig& cfg);

// Independent route to the detector-correlation pieces: evolve the symmetrized
// products ρ⊗{x̂,|ψ><ψ|}/2 and ρ⊗{p̂,|ψ><ψ|}/2 directly.
std::pair<Matrix, Matrix> detector_correlation_maps(const DensityOperator& rho_i,
                                                    const DetectorWavefunction& psi,
                                                    const Matrix& A,
                                                    const CouplingConfig& cfg);

// Adjoint (Heisenberg-picture) maps used by the retrodictive forms.
Matrix adjoint_nonselective(const Matrix& op_f, const DetectorWavefunction& psi,
                            const Matrix& A, const CouplingConfig& cfg);
std::pair<Matrix, Matrix> adjoint_correlation_maps(const Matrix& op_f,
                                                   const DetectorWavefunction& psi,
                                                   const Matrix& A,
                                                   const CouplingConfig& cfg);

// --------------------------- perturbative expansion -------------------------

// n-th order terms of the expansions of E, X, P in the coupling:
// (1/n!)(g/iħ)^n·m_n·(ad A)^n(ρ) with m_n one of <p^n>_0, <{p^n,x}>_0/2,
// <p^{n+1}>_0. Moments must extend to order n+1.
struct ExpansionTerms {
    Matrix nonselective;
    Matrix x_weighted;
    Matrix p_weighted;
};
ExpansionTerms expansion_term(const DensityOperator& rho_i, const DetectorMoments& m,
                              const Matrix& A, const CouplingConfig& cfg, int n);
ExpansionTerms expansion_term(const DensityOperator& rho_i,
                              const DetectorWavefunction& psi, const Matrix& A,
                              const CouplingConfig& cfg, int n);
ExpansionTerms expansion_partial_sum(const DensityOperator& rho_i,
                                     const DetectorMoments& m, const Matrix& A,
                                     const CouplingConfig& cfg, int max_order);

} // namespace vnmeas
