// qubit_exact.cpp

#include "vnmeas/qubit_exact.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace vnmeas {

QubitSeriesCoefficients series_coefficients(const DetectorMoments& m, double a_scale,
                                            const CouplingConfig& cfg, double tol) {
    if (a_scale == 0.0)
        throw std::invalid_argument("series_coefficients: a_scale must be nonzero");
    if (!(cfg.hbar > 0.0))
        throw std::invalid_argument("series_coefficients: hbar must be > 0");
    constexpr int kMaxSteps = 40;

    const double lambda = 2.0 * a_scale * cfg.g / cfg.hbar;
    QubitSeriesCoefficients out;
    out.a_scale = a_scale;

    double lambda_odd = lambda;          // λ^{2n-1}
    double fact_odd = 1.0;               // (2n-1)!
    double sign = -1.0;                  // (-1)^n
    for (int n = 1; n <= kMaxSteps; ++n) {
        if (m.max_order() < 2 * n + 1)
            throw SeriesNotConverged(
                "series_coefficients: moments exhausted at order " +
                std::to_string(2 * n + 1) + " before the series converged");

        const double lambda_even = lambda_odd * lambda; // λ^{2n}
        const double fact_even = fact_odd * (2.0 * n);  // (2n)!

        const double dc = sign / fact_even * lambda_even * m.p_moments[2 * n];
        const double ds = -sign / fact_odd * lambda_odd * m.p_moments[2 * n - 1];
        const double dc_x = sign / fact_even * lambda_even * m.sym_moments[2 * n];
        const double ds_x = -sign / fact_odd * lambda_odd * m.sym_moments[2 * n - 1];
        const double dc_p = sign / fact_even * lambda_even * m.p_moments[2 * n + 1];
        const double ds_p = -sign / fact_odd * lambda_odd * m.p_moments[2 * n];

        out.c += dc;
        out.s += ds;
        out.c_x += dc_x;
        out.s_x += ds_x;
        out.c_p += dc_p;
        out.s_p += ds_p;
        out.truncation_order = n;

        const double largest =
            std::max({std::abs(dc), std::abs(ds), std::abs(dc_x), std::abs(ds_x),
                      std::abs(dc_p), std::abs(ds_p)});
        if (largest < tol) return out;

        lambda_odd = lambda_even * lambda;
        fact_odd = fact_even * (2.0 * n + 1.0);
        sign = -sign;
    }
    throw SeriesNotConverged("series_coefficients: no convergence within 40 steps");
}

QubitObservableFrame qubit_frame(const Matrix& A) {
    require_hermitian(A, "qubit_frame");
    if (A.rows() != 2)
        throw std::invalid_argument("qubit_frame: requires a 2x2 observable");

    QubitObservableFrame frame;
    frame.offset = A.trace().real() / 2.0;
    const Matrix traceless = A - frame.offset * identity(2);

    Eigen::SelfAdjointEigenSolver<Matrix> es(traceless);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("qubit_frame: eigensolve failed");
    frame.a_scale = es.eigenvalues()(1); // eigenvalues are ±a_scale, ascending

    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if (frame.a_scale < 1e-12 * scale)
        throw std::invalid_argument(
            "qubit_frame: observable is proportional to the identity");

    // σ3 convention: +a_scale eigenvector first
    frame.basis = Matrix(2, 2);
    frame.basis.col(0) = es.eigenvectors().col(1);
    frame.basis.col(1) = es.eigenvectors().col(0);
    return frame;
}

ConditionedResponse exact_conditioned_means(const BlochVector& r, const Matrix& P_f,
                                            const QubitSeriesCoefficients& coeffs,
                                            const DetectorMoments& m,
                                            const CouplingConfig& cfg,
                                            double prob_floor) {
    require_hermitian(P_f, "exact_conditioned_means");
    if (P_f.rows() != 2)
        throw std::invalid_argument("exact_conditioned_means: requires a qubit P_f");
    const double trace_pf = P_f.trace().real();
    if (trace_pf <= 0.0)
        throw std::invalid_argument("exact_conditioned_means: Tr[P_f] must be > 0");
    const Matrix rho_f = P_f / trace_pf;

    const double t1 = (rho_f * sigma1()).trace().real();
    const double t2 = (rho_f * sigma2()).trace().real();
    const double t3 = (rho_f * sigma3()).trace().real();
    const double overlap2 = 1.0 + r.r1 * t1 + r.r2 * t2 + r.r3 * t3; // 2 Tr[ρ_f ρ_i]

    const double cond = overlap2 + (coeffs.c * r.r1 - coeffs.s * r.r2) * t1 +
                        (coeffs.c * r.r2 + coeffs.s * r.r1) * t2; // p̃(f)

    const double prob = cond * trace_pf / 2.0;
    if (prob < prob_floor)
        throw DegeneratePostSelection("exact_conditioned_means: post-selection "
                                      "probability below floor");

    // symmetrized-product correction: E({A,ρ}/2) = (A/2)(σ3 + r3·1), so the
    // post-selection sees A(r3 + t3), not A·r3 alone
    const double sym_corr = coeffs.a_scale * (r.r3 + t3);
    ConditionedResponse out;
    out.post_prob = prob;
    out.mean_x = (m.mean_x * overlap2 + (coeffs.c_x * r.r1 - coeffs.s_x * r.r2) * t1 +
                  (coeffs.c_x * r.r2 + coeffs.s_x * r.r1) * t2 + cfg.g * sym_corr) /
                 cond;
    out.mean_p = (m.mean_p * overlap2 + (coeffs.c_p * r.r1 - coeffs.s_p * r.r2) * t1 +
                  (coeffs.c_p * r.r2 + coeffs.s_p * r.r1) * t2) /
                 cond;
    return out;
}

ConditionedResponse qubit_exact_response(const Matrix& A, const DensityOperator& rho_i,
                                         const Matrix& P_f, const DetectorMoments& m,
                                         const CouplingConfig& cfg, double tol,
                                         double prob_floor) {
    require_same_dim(A, rho_i.mat(), "qubit_exact_response");
    require_same_dim(A, P_f, "qubit_exact_response");
    const QubitObservableFrame frame = qubit_frame(A);

    const Matrix rho_t = frame.basis.adjoint() * rho_i.mat() * frame.basis;
    BlochVector r;
    r.r1 = (rho_t * sigma1()).trace().real();
    r.r2 = (rho_t * sigma2()).trace().real();
    r.r3 = (rho_t * sigma3()).trace().real();
    const Matrix pf_t = frame.basis.adjoint() * P_f * frame.basis;

    const QubitSeriesCoefficients coeffs =
        series_coefficients(m, frame.a_scale, cfg, tol);
    ConditionedResponse out = exact_conditioned_means(r, pf_t, coeffs, m, cfg, prob_floor);
    out.mean_x += cfg.g * frame.offset; // trace part shifts every branch uniformly
    return out;
}

Matrix qubit_nonselective(const BlochVector& r, const QubitSeriesCoefficients& coeffs) {
    Matrix rho = 0.5 * (identity(2) + r.r1 * sigma1() + r.r2 * sigma2() + r.r3 * sigma3());
    rho += 0.5 * ((coeffs.c * r.r1 - coeffs.s * r.r2) * sigma1() +
                  (coeffs.c * r.r2 + coeffs.s * r.r1) * sigma2());
    return rho;
}

Eigen::Vector3d bloch_vector_field(double a_scale, const BlochVector& r) {
    return {-2.0 * a_scale * r.r2, 2.0 * a_scale * r.r1, 0.0};
}

} // namespace vnmeas
