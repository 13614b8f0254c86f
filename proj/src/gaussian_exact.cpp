// gaussian_exact.cpp

#include "vnmeas/gaussian_exact.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace vnmeas {

Matrix lindblad_map(const Matrix& A, const Matrix& rho) {
    require_hermitian(A, "lindblad_map");
    require_same_dim(A, rho, "lindblad_map");
    const Matrix asq = A.adjoint() * A;
    return A * rho * A.adjoint() - 0.5 * anticommutator(rho, asq);
}

DensityOperator decohered_state(const Matrix& A, const DensityOperator& rho_i,
                                double eps) {
    require_hermitian(A, "decohered_state");
    require_same_dim(A, rho_i.mat(), "decohered_state");
    if (eps < 0.0)
        throw std::invalid_argument("decohered_state: eps must be >= 0");

    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("decohered_state: eigensolve failed");
    const Matrix& v = es.eigenvectors();
    const auto& a = es.eigenvalues();

    Matrix tilde = v.adjoint() * rho_i.mat() * v;
    for (Eigen::Index k = 0; k < A.rows(); ++k)
        for (Eigen::Index l = 0; l < A.rows(); ++l) {
            const double gap = a(k) - a(l);
            tilde(k, l) *= std::exp(-eps * gap * gap / 2.0);
        }
    Matrix out = v * tilde * v.adjoint();
    out = 0.5 * (out + out.adjoint());
    return DensityOperator(std::move(out));
}

WeakValue decohered_weak_value(const Matrix& A, const DensityOperator& rho_i,
                               const Matrix& P_f, double eps, double prob_floor) {
    return weak_value(A, decohered_state(A, rho_i, eps), P_f, prob_floor);
}

ConditionedResponse gaussian_conditioned_means(const Matrix& A,
                                               const DensityOperator& rho_i,
                                               const Matrix& P_f,
                                               const DecoherenceParams& params,
                                               double prob_floor) {
    if (!(params.sigma > 0.0) || !(params.hbar > 0.0))
        throw std::invalid_argument("gaussian_conditioned_means: sigma and hbar > 0");
    const WeakValue wv =
        decohered_weak_value(A, rho_i, P_f, params.epsilon(), prob_floor);

    ConditionedResponse out;
    out.post_prob = wv.post_prob;
    out.mean_x = params.g * wv.re();
    out.mean_p = (params.g / params.hbar) *
                 (params.hbar * params.hbar / (4.0 * params.sigma * params.sigma)) *
                 wv.two_im();
    return out;
}

} // namespace vnmeas
