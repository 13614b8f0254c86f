// weak_values.cpp

#include "vnmeas/weak_values.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace vnmeas {

namespace {

void require_weak_value_inputs(const Matrix& A, const DensityOperator& rho_i,
                               const Matrix& P_f, const char* who) {
    require_hermitian(A, who);
    require_same_dim(A, rho_i.mat(), who);
    require_hermitian(P_f, who);
    require_same_dim(P_f, rho_i.mat(), who);
    Eigen::SelfAdjointEigenSolver<Matrix> es(P_f);
    if (es.eigenvalues().minCoeff() < -1e-10 || es.eigenvalues().maxCoeff() > 1.0 + 1e-10)
        throw std::invalid_argument(std::string(who) +
                                    ": post-selection must satisfy 0 <= P_f <= 1");
}

} // namespace

WeakValue weak_value(const Matrix& A, const DensityOperator& rho_i, const Matrix& P_f,
                     double prob_floor) {
    require_weak_value_inputs(A, rho_i, P_f, "weak_value");

    const double prob = (P_f * rho_i.mat()).trace().real();
    if (prob < prob_floor)
        throw DegeneratePostSelection("weak_value: post-selection probability " +
                                      std::to_string(prob) + " below floor");

    const Complex numerator = (P_f * A * rho_i.mat()).trace();
    const Complex value = numerator / prob;

    // internal consistency with the anticommutator/commutator forms
    const double re_split =
        (P_f * anticommutator(A, rho_i.mat())).trace().real() / (2.0 * prob);
    const double im_split =
        (P_f * (-kImag) * commutator(A, rho_i.mat())).trace().real() / (2.0 * prob);
    const double scale = 1.0 + std::abs(value);
    if (std::abs(value.real() - re_split) > 1e-12 * scale ||
        std::abs(value.imag() - im_split) > 1e-12 * scale)
        throw std::runtime_error("weak_value: split-form consistency check failed");

    return {value, prob};
}

double log_directional_derivative(const Matrix& A, const DensityOperator& rho_i,
                                  const Matrix& P_f, DerivativeMode mode, double step,
                                  double prob_floor) {
    if (mode == DerivativeMode::Analytic)
        return weak_value(A, rho_i, P_f, prob_floor).two_im();

    if (!(step > 0.0))
        throw std::invalid_argument("log_directional_derivative: step must be > 0");
    const auto prob_at = [&](double eps) {
        const double p = (P_f * unitary_flow(A, rho_i, eps).mat()).trace().real();
        if (p < prob_floor)
            throw DegeneratePostSelection(
                "log_directional_derivative: probability vanished in the stencil");
        return p;
    };
    return (std::log(prob_at(step)) - std::log(prob_at(-step))) / (2.0 * step);
}

LinearResponsePrediction linear_response(const Matrix& A, const DensityOperator& rho_i,
                                         const Matrix& P_f, const DetectorMoments& m,
                                         const CouplingConfig& cfg, double prob_floor) {
    if (m.max_order() < 2)
        throw std::invalid_argument("linear_response: moments required to order 2");
    const WeakValue wv = weak_value(A, rho_i, P_f, prob_floor);

    LinearResponsePrediction out;
    out.mean_x0 = m.mean_x;
    out.mean_p0 = m.mean_p;
    out.sym_px = m.sym_moments[1];
    out.p_squared = m.p_moments[2];
    out.g = cfg.g;
    out.hbar = cfg.hbar;
    out.mean_x = m.mean_x + (cfg.g / cfg.hbar) * out.sym_px * wv.two_im() +
                 cfg.g * wv.re();
    out.mean_p = m.mean_p + (cfg.g / cfg.hbar) * out.p_squared * wv.two_im();
    return out;
}

WeakValue retrodictive_weak_value(const Matrix& A, const DensityOperator& rho_i,
                                  const Matrix& P_f, double prob_floor) {
    require_weak_value_inputs(A, rho_i, P_f, "retrodictive_weak_value");
    const double trace_pf = P_f.trace().real();
    if (trace_pf <= 0.0)
        throw std::invalid_argument("retrodictive_weak_value: Tr[P_f] must be > 0");
    const Matrix rho_f = P_f / trace_pf;

    const double overlap = (rho_f * rho_i.mat()).trace().real();
    if (overlap * trace_pf < prob_floor)
        throw DegeneratePostSelection("retrodictive_weak_value: overlap below floor");

    const Complex value = (rho_f * A * rho_i.mat()).trace() / overlap;
    return {value, overlap * trace_pf};
}

} // namespace vnmeas
