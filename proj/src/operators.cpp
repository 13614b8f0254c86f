// operators.cpp - implementation of the dense operator algebra

#include "vnmeas/operators.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace vnmeas {

Matrix identity(Eigen::Index dim) {
    if (dim < 1) throw std::invalid_argument("identity: dim must be >= 1");
    return Matrix::Identity(dim, dim);
}

Matrix sigma1() {
    Matrix m(2, 2);
    m << 0.0, 1.0,
         1.0, 0.0;
    return m;
}

Matrix sigma2() {
    Matrix m(2, 2);
    m << 0.0, -kImag,
         kImag, 0.0;
    return m;
}

Matrix sigma3() {
    Matrix m(2, 2);
    m << 1.0, 0.0,
         0.0, -1.0;
    return m;
}

Matrix pauli(int k) {
    switch (k) {
        case 1: return sigma1();
        case 2: return sigma2();
        case 3: return sigma3();
        default: throw std::invalid_argument("pauli: index must be 1, 2 or 3");
    }
}

Vector basis_ket(Eigen::Index dim, Eigen::Index i) {
    if (dim < 1) throw std::invalid_argument("basis_ket: dim must be >= 1");
    if (i < 0 || i >= dim) throw std::out_of_range("basis_ket: index out of range");
    Vector v = Vector::Zero(dim);
    v(i) = 1.0;
    return v;
}

Matrix projector(const Vector& ket) {
    const double n2 = ket.squaredNorm();
    if (n2 <= 0.0) throw std::invalid_argument("projector: zero vector");
    return ket * ket.adjoint() / n2;
}

bool is_hermitian(const Matrix& a, double tol) {
    if (a.rows() != a.cols()) return false;
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_anti_hermitian(const Matrix& a, double tol) {
    if (a.rows() != a.cols()) return false;
    return (a + a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

void require_square(const Matrix& a, const char* who) {
    if (a.rows() != a.cols() || a.rows() < 1)
        throw std::invalid_argument(std::string(who) + ": operator must be square");
    if (!a.allFinite())
        throw std::invalid_argument(std::string(who) + ": operator has non-finite entries");
}

void require_same_dim(const Matrix& a, const Matrix& b, const char* who) {
    require_square(a, who);
    require_square(b, who);
    if (a.rows() != b.rows())
        throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

void require_hermitian(const Matrix& a, const char* who, double tol) {
    require_square(a, who);
    // scale-aware tolerance so large operators are not rejected for roundoff
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if (!is_hermitian(a, tol * scale))
        throw std::invalid_argument(std::string(who) + ": operator is not Hermitian");
}

Matrix tensor_product(const Matrix& a, const Matrix& b) {
    require_square(a, "tensor_product");
    require_square(b, "tensor_product");
    const Eigen::Index da = a.rows(), db = b.rows();
    Matrix out(da * db, da * db);
    for (Eigen::Index i = 0; i < da; ++i)
        for (Eigen::Index j = 0; j < da; ++j)
            out.block(i * db, j * db, db, db) = a(i, j) * b;
    return out;
}

Matrix partial_trace(const Matrix& joint, Eigen::Index d_sys, Eigen::Index d_det,
                     Subsystem keep) {
    require_square(joint, "partial_trace");
    if (d_sys < 1 || d_det < 1 || joint.rows() != d_sys * d_det)
        throw std::invalid_argument("partial_trace: dims do not factor the joint dimension");

    if (keep == Subsystem::System) {
        Matrix out = Matrix::Zero(d_sys, d_sys);
        for (Eigen::Index i = 0; i < d_sys; ++i)
            for (Eigen::Index j = 0; j < d_sys; ++j)
                for (Eigen::Index k = 0; k < d_det; ++k)
                    out(i, j) += joint(i * d_det + k, j * d_det + k);
        return out;
    }
    Matrix out = Matrix::Zero(d_det, d_det);
    for (Eigen::Index k = 0; k < d_det; ++k)
        for (Eigen::Index l = 0; l < d_det; ++l)
            for (Eigen::Index i = 0; i < d_sys; ++i)
                out(k, l) += joint(i * d_det + k, i * d_det + l);
    return out;
}

Matrix commutator(const Matrix& a, const Matrix& b) {
    require_same_dim(a, b, "commutator");
    return a * b - b * a;
}

Matrix anticommutator(const Matrix& a, const Matrix& b) {
    require_same_dim(a, b, "anticommutator");
    return a * b + b * a;
}

Matrix adjoint_action(const Matrix& a, const Matrix& x, int n) {
    require_same_dim(a, x, "adjoint_action");
    if (n < 0) throw std::invalid_argument("adjoint_action: order must be >= 0");
    Matrix out = x;
    for (int k = 0; k < n; ++k) out = a * out - out * a;
    return out;
}

namespace {

Matrix exp_via_eigenbasis(const Matrix& h, Complex prefactor) {
    // exp(prefactor·h) for Hermitian h
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("matrix_exponential: eigensolve failed");
    const Eigen::Index d = h.rows();
    Vector phases(d);
    for (Eigen::Index i = 0; i < d; ++i)
        phases(i) = std::exp(prefactor * Complex(es.eigenvalues()(i), 0.0));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix exp_series(const Matrix& a) {
    constexpr int kMaxTerms = 10000;
    constexpr double kCutoff = 1e-16;

    // scale down so the series converges quickly, square back up
    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff(); // induced inf-norm
    int squarings = 0;
    if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    const Matrix b = a / std::pow(2.0, squarings);

    Matrix sum = Matrix::Identity(a.rows(), a.cols());
    Matrix term = sum;
    bool converged = false;
    for (int n = 1; n <= kMaxTerms; ++n) {
        term = (term * b) / static_cast<double>(n);
        sum += term;
        if (term.cwiseAbs().maxCoeff() < kCutoff) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw std::runtime_error("matrix_exponential: series did not converge within cap");

    for (int s = 0; s < squarings; ++s) sum = sum * sum;
    return sum;
}

} // namespace

Matrix matrix_exponential(const Matrix& a) {
    require_square(a, "matrix_exponential");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if (is_hermitian(a, 1e-13 * scale)) return exp_via_eigenbasis(a, Complex(1.0, 0.0));
    if (is_anti_hermitian(a, 1e-13 * scale)) {
        // a = -i h with h = i a Hermitian
        return exp_via_eigenbasis(kImag * a, Complex(0.0, -1.0));
    }
    return exp_series(a);
}

DensityOperator::DensityOperator(Matrix rho) : rho_(std::move(rho)) {
    require_square(rho_, "DensityOperator");
    const double tr_err = std::abs(rho_.trace() - Complex(1.0, 0.0));
    if (tr_err > 1e-12)
        throw std::invalid_argument("DensityOperator: trace differs from 1 by " +
                                    std::to_string(tr_err));
    if (!is_hermitian(rho_, 1e-12))
        throw std::invalid_argument("DensityOperator: not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho_);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("DensityOperator: eigensolve failed");
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw std::invalid_argument("DensityOperator: negative eigenvalue " +
                                    std::to_string(es.eigenvalues().minCoeff()));
}

DensityOperator DensityOperator::from_bloch(const BlochVector& r) {
    if (r.squared_norm() > 1.0 + 1e-12)
        throw std::invalid_argument("DensityOperator::from_bloch: |r| > 1");
    Matrix rho = 0.5 * (identity(2) + r.r1 * sigma1() + r.r2 * sigma2() + r.r3 * sigma3());
    return DensityOperator(std::move(rho));
}

DensityOperator DensityOperator::pure(const Vector& ket) {
    return DensityOperator(projector(ket));
}

DensityOperator DensityOperator::maximally_mixed(Eigen::Index dim) {
    return DensityOperator(identity(dim) / static_cast<double>(dim));
}

BlochVector DensityOperator::bloch() const {
    if (dim() != 2)
        throw std::invalid_argument("DensityOperator::bloch: requires a qubit state");
    BlochVector r;
    r.r1 = (rho_ * sigma1()).trace().real();
    r.r2 = (rho_ * sigma2()).trace().real();
    r.r3 = (rho_ * sigma3()).trace().real();
    return r;
}

DensityOperator unitary_flow(const Matrix& a, const DensityOperator& rho, double eps) {
    require_hermitian(a, "unitary_flow");
    require_same_dim(a, rho.mat(), "unitary_flow");
    const Matrix u = matrix_exponential(Complex(0.0, -eps) * a);
    Matrix out = u * rho.mat() * u.adjoint();
    // unitary conjugation preserves the spectrum; re-symmetrize roundoff only
    out = 0.5 * (out + out.adjoint());
    return DensityOperator(std::move(out));
}

} // namespace vnmeas
