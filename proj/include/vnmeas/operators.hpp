// operators.hpp - dense complex operator algebra for small system spaces

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>

namespace vnmeas {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kImag{0.0, 1.0};

// --------------------------- common operators -------------------------------

Matrix identity(Eigen::Index dim);
Matrix sigma1();
Matrix sigma2();
Matrix sigma3();
Matrix pauli(int k); // k in {1,2,3}

Vector basis_ket(Eigen::Index dim, Eigen::Index i);
Matrix projector(const Vector& ket); // |v><v| / <v|v>

// --------------------------- predicates -------------------------------------

bool is_hermitian(const Matrix& a, double tol = 1e-12);
bool is_anti_hermitian(const Matrix& a, double tol = 1e-12);

void require_square(const Matrix& a, const char* who);
void require_same_dim(const Matrix& a, const Matrix& b, const char* who);
void require_hermitian(const Matrix& a, const char* who, double tol = 1e-10);

// --------------------------- algebra -----------------------------------------

// Kronecker product with system index slow, detector index fast:
// (a⊗b)(i·db+k, j·db+l) = a(i,j) b(k,l). All modules share this ordering.
Matrix tensor_product(const Matrix& a, const Matrix& b);

enum class Subsystem { System, Detector };

// Partial trace of a (d_sys·d_det)-dimensional operator over one factor.
Matrix partial_trace(const Matrix& joint, Eigen::Index d_sys, Eigen::Index d_det,
                     Subsystem keep);

Matrix commutator(const Matrix& a, const Matrix& b);     // ab - ba
Matrix anticommutator(const Matrix& a, const Matrix& b); // ab + ba

// (ad a)^n(x): n-fold iterated commutator [a,[a,...[a,x]]]; n = 0 returns x.
Matrix adjoint_action(const Matrix& a, const Matrix& x, int n);

// exp(a). Hermitian and anti-Hermitian inputs go through the eigenbasis
// (exact to roundoff); anything else uses scaling-and-squaring with a
// term-norm cutoff of 1e-16 and a cap of 1e4 terms.
Matrix matrix_exponential(const Matrix& a);

// --------------------------- states ------------------------------------------

struct BlochVector {
    double r1 = 0.0;
    double r2 = 0.0;
    double r3 = 0.0;
    double squared_norm() const { return r1 * r1 + r2 * r2 + r3 * r3; }
};

// Unit-trace positive operator. Construction validates trace (1e-12),
// Hermiticity (1e-12) and the eigenvalue floor -1e-10.
class DensityOperator {
  public:
    explicit DensityOperator(Matrix rho);

    static DensityOperator from_bloch(const BlochVector& r);
    static DensityOperator pure(const Vector& ket);
    static DensityOperator maximally_mixed(Eigen::Index dim);

    const Matrix& mat() const { return rho_; }
    Eigen::Index dim() const { return rho_.rows(); }

    BlochVector bloch() const; // qubit only

  private:
    Matrix rho_;
};

// exp(-iεa) ρ exp(iεa) for a Hermitian generator a; ε has units inverse to a.
DensityOperator unitary_flow(const Matrix& a, const DensityOperator& rho, double eps);

} // namespace vnmeas
