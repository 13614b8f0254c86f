#include "vnmeas/vonneumann.hpp"

#include "vnmeas/random_states.hpp"

#include "doctest.h"
#include "test_util.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace vnmeas;
using testutil::max_abs_diff;

namespace {

const PositionGrid kGrid = default_grid(1.0, 3.0, 512);

DetectorWavefunction gaussian() { return gaussian_state(kGrid, 1.0); }

double mean_x_of(const DetectorWavefunction& psi) {
    double acc = 0.0;
    for (int j = 0; j < psi.grid.n_points; ++j)
        acc += psi.grid.point(j) * std::norm(psi.amplitudes(j)) * psi.grid.dx;
    return acc;
}

} // namespace

TEST_CASE("evolve_joint translates eigenstate branches by g·a") {
    const DetectorWavefunction psi = gaussian();
    const CouplingConfig cfg{0.8, 1.0};

    // |0><0| is the +1 eigenstate of sigma3: detector moves by +g
    const JointState joint =
        evolve_joint(DensityOperator::pure(basis_ket(2, 0)), psi, sigma3(), cfg);
    REQUIRE(joint.members.size() == 1);
    const DetectorWavefunction target = gaussian_state(kGrid, 1.0, 0.8);
    CHECK((joint.members[0].amplitudes.row(0).transpose() - target.amplitudes)
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    CHECK(joint.members[0].amplitudes.row(1).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("evolve_joint at g = 0 leaves amplitudes unchanged") {
    Rng rng(21);
    const DetectorWavefunction psi = random_detector_state(rng, kGrid, 1.0, 1.0);
    const Matrix A = random_hermitian(rng, 2);
    const Vector ket = random_ket(rng, 2);
    const JointState joint =
        evolve_joint(DensityOperator::pure(ket), psi, A, CouplingConfig{0.0, 1.0});
    REQUIRE(joint.members.size() == 1);
    const Eigen::MatrixXcd expected = ket * psi.amplitudes.transpose();
    // the sole member is the eigenvector up to phase; compare projectors instead
    Matrix rho_sys = Matrix::Zero(2, 2);
    for (int j = 0; j < kGrid.n_points; ++j) {
        const auto col = joint.members[0].amplitudes.col(j);
        rho_sys += col * col.adjoint() * kGrid.dx;
    }
    CHECK(max_abs_diff(rho_sys, ket * ket.adjoint()) < 1e-12);
}

TEST_CASE("evolve_joint rejects bad inputs") {
    const DetectorWavefunction psi = gaussian();
    Matrix non_hermitian(2, 2);
    non_hermitian << 0.0, 1.0, 0.0, 0.0;
    CHECK_THROWS_AS(evolve_joint(DensityOperator::maximally_mixed(2), psi,
                                 non_hermitian, CouplingConfig{0.1, 1.0}),
                    std::invalid_argument);
    // shift too large for the grid: wrap guard trips
    CHECK_THROWS_AS(evolve_joint(DensityOperator::maximally_mixed(2), psi, sigma3(),
                                 CouplingConfig{14.0, 1.0}),
                    WrapGuardViolation);
    // hbar mismatch between detector and coupling
    CHECK_THROWS_AS(evolve_joint(DensityOperator::maximally_mixed(2), psi, sigma3(),
                                 CouplingConfig{0.1, 2.0}),
                    std::invalid_argument);
}

TEST_CASE("unconditioned response shifts <x> by g<A>_0 and leaves <p>") {
    Rng rng(22);
    for (int trial = 0; trial < 8; ++trial) {
        const int dim = rng.integer(2, 3);
        const Matrix A = random_hermitian(rng, dim);
        const DensityOperator rho = random_density(rng, dim);
        const double max_eig = A.cwiseAbs().rowwise().sum().maxCoeff();
        const double sigma = 1.0, x0 = rng.uniform(-0.5, 0.5);
        const double p0 = rng.uniform(-0.4, 0.4);
        const double g = rng.uniform(0.0, 3.0 * sigma);
        const PositionGrid grid = default_grid(sigma, g * max_eig + std::abs(x0), 512);
        const DetectorWavefunction psi = gaussian_state(grid, sigma, x0, p0);
        const CouplingConfig cfg{g, 1.0};

        const ConditionedResponse resp =
            conditioned_response(rho, psi, A, identity(dim), cfg);
        const double mean_a = (A * rho.mat()).trace().real();
        const DetectorMoments m = moments(psi, 1);
        CHECK(resp.post_prob == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(resp.mean_x - (m.mean_x + g * mean_a)) < 1e-8);
        CHECK(std::abs(resp.mean_p - m.mean_p) < 1e-8);
    }
}

TEST_CASE("kraus_position reduces to ψ(x)·1 at g = 0 and splits eigenbranches") {
    const DetectorWavefunction psi = gaussian();
    const double x = kGrid.point(300);

    const Matrix m0 = kraus_position(psi, sigma3(), CouplingConfig{0.0, 1.0}, x);
    CHECK(max_abs_diff(m0, psi.amplitudes(300) * identity(2)) < 1e-12);

    const double g = 0.7;
    const Matrix m = kraus_position(psi, sigma3(), CouplingConfig{g, 1.0}, x);
    const double norm = std::pow(2.0 * std::numbers::pi, -0.25);
    const double up = norm * std::exp(-(x - g) * (x - g) / 4.0);
    const double dn = norm * std::exp(-(x + g) * (x + g) / 4.0);
    CHECK(std::abs(m(0, 0) - Complex(up, 0.0)) < 1e-6);
    CHECK(std::abs(m(1, 1) - Complex(dn, 0.0)) < 1e-6);
    CHECK(std::abs(m(0, 1)) < 1e-14);

    CHECK_THROWS_AS(kraus_position(psi, sigma3(), CouplingConfig{g, 1.0},
                                   x + 0.3 * kGrid.dx),
                    std::invalid_argument);
}

TEST_CASE("POVM completeness for randomized non-Gaussian detectors") {
    Rng rng(23);
    for (int trial = 0; trial < 6; ++trial) {
        const int dim = rng.integer(2, 3);
        const Matrix A = random_hermitian(rng, dim);
        const double max_eig = A.cwiseAbs().rowwise().sum().maxCoeff();
        const double g = rng.uniform(-1.5, 1.5);
        const PositionGrid grid = default_grid(1.0, std::abs(g) * max_eig + 3.0, 512);
        const DetectorWavefunction psi = random_detector_state(rng, grid, 1.0, 1.0);
        const CouplingConfig cfg{g, 1.0};

        const std::vector<double> ones(grid.n_points, 1.0);
        CHECK(max_abs_diff(povm_position_weighted_sum(psi, A, cfg, ones),
                           identity(dim)) < 1e-8);

        // momentum side: Σ_p F_p dp = 1 (norm of the momentum representation)
        const MomentumAmplitudes mom = momentum_representation(psi);
        Matrix f_sum = Matrix::Zero(dim, dim);
        for (int k = 0; k < grid.n_points; ++k)
            f_sum += povm_momentum(psi, A, cfg, mom.point(k)) * mom.dp();
        CHECK(max_abs_diff(f_sum, identity(dim)) < 1e-8);
    }
}

TEST_CASE("POVM completeness via explicit Kraus products on a coarse grid") {
    Rng rng(24);
    const Matrix A = random_hermitian(rng, 2);
    const CouplingConfig cfg{0.9, 1.0};
    const double max_eig = A.cwiseAbs().rowwise().sum().maxCoeff();
    const PositionGrid grid = default_grid(1.0, cfg.g * max_eig + 0.3, 256);
    const DetectorWavefunction psi = gaussian_state(grid, 1.0, 0.3, 0.2);

    Matrix acc = Matrix::Zero(2, 2);
    for (int j = 0; j < grid.n_points; ++j) {
        const Matrix m = kraus_position(psi, A, cfg, grid.point(j));
        acc += m.adjoint() * m * grid.dx;
    }
    CHECK(max_abs_diff(acc, identity(2)) < 1e-10);
}

TEST_CASE("momentum Kraus operators: phase form, Fourier relation, trivial POVM") {
    Rng rng(25);
    const Matrix A = random_hermitian(rng, 3);
    const double max_eig = A.cwiseAbs().rowwise().sum().maxCoeff();
    const PositionGrid grid = default_grid(1.0, 1.2 * max_eig, 512);
    const DetectorWavefunction psi = gaussian_state(grid, 1.0, 0.2, -0.3);
    const CouplingConfig cfg{1.2, 1.0};
    const MomentumAmplitudes mom = momentum_representation(psi);

    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    for (int k : {100, 256, 400}) {
        const double p = mom.point(k);
        const Matrix n_direct = kraus_momentum(psi, A, cfg, p);

        // F_p = |ψ̃(p)|²·1 for any A
        CHECK(max_abs_diff(povm_momentum(psi, A, cfg, p),
                           std::norm(mom.amplitudes(k)) * identity(3)) < 1e-14);
        CHECK(max_abs_diff(n_direct.adjoint() * n_direct,
                           std::norm(mom.amplitudes(k)) * identity(3)) < 1e-12);

        // N_p from the Fourier transform of {M_x}: per eigenbranch the
        // transform of ψ(x - g·a) evaluated at p
        Vector diag(3);
        for (Eigen::Index i = 0; i < 3; ++i) {
            const Vector branch =
                translated(grid, psi.amplitudes, psi.hbar, cfg.g * es.eigenvalues()(i));
            diag(i) = position_to_momentum(grid, branch, psi.hbar)(k);
        }
        const Matrix n_fourier =
            es.eigenvectors() * diag.asDiagonal() * es.eigenvectors().adjoint();
        CHECK(max_abs_diff(n_fourier, n_direct) < 1e-8);
    }

    // g = 0 decouples
    const Matrix n0 = kraus_momentum(psi, A, CouplingConfig{0.0, 1.0}, mom.point(256));
    CHECK(max_abs_diff(n0, mom.amplitudes(256) * identity(3)) < 1e-14);
}

TEST_CASE("polar decomposition of M_x: real detectors are minimally disturbing") {
    const PositionGrid grid = default_grid(1.0, 1.0, 512);
    const CouplingConfig cfg{0.8, 1.0};
    Rng rng(26);
    const Matrix A = random_hermitian(rng, 2);

    SUBCASE("purely real ψ gives Hermitian positive M_x (U_x = 1)") {
        const DetectorWavefunction psi = gaussian_state(grid, 1.0, 0.4, 0.0);
        for (int j : {180, 256, 330}) {
            const Matrix m = kraus_position(psi, A, cfg, grid.point(j));
            CHECK(is_hermitian(m, 1e-12));
            Eigen::SelfAdjointEigenSolver<Matrix> es(m);
            CHECK(es.eigenvalues().minCoeff() > -1e-12);
        }
    }
    SUBCASE("complex ψ: M_x = U_x·E_x^{1/2} with U_x unitary") {
        const DetectorWavefunction psi = gaussian_state(grid, 1.0, 0.0, 0.7);
        for (int j : {200, 256, 300}) {
            const Matrix m = kraus_position(psi, A, cfg, grid.point(j));
            const Matrix e = povm_position(psi, A, cfg, grid.point(j));
            CHECK(max_abs_diff(m.adjoint() * m, e) < 1e-12);
            Eigen::SelfAdjointEigenSolver<Matrix> es(e);
            Vector inv_root(2);
            for (int i = 0; i < 2; ++i) {
                REQUIRE(es.eigenvalues()(i) > 1e-12); // stay off the tails
                inv_root(i) = 1.0 / std::sqrt(es.eigenvalues()(i));
            }
            const Matrix u = m * es.eigenvectors() * inv_root.asDiagonal() *
                             es.eigenvectors().adjoint();
            CHECK(max_abs_diff(u * u.adjoint(), identity(2)) < 1e-10);
        }
    }
}

TEST_CASE("Wigner operator marginals reproduce both POVMs") {
    const PositionGrid grid = default_grid(1.0, 0.8, 256);
    const DetectorWavefunction psi = gaussian_state(grid, 1.0, 0.0, 0.3);
    const CouplingConfig cfg{0.8, 1.0};
    Rng rng(27);
    const Matrix A = random_hermitian(rng, 2);
    const double dp = grid.momentum_step(1.0);

    SUBCASE("∫dp W = E_x") {
        for (int j : {100, 128, 160}) {
            const double x = grid.point(j);
            Matrix acc = Matrix::Zero(2, 2);
            for (int k = 0; k < grid.n_points; ++k)
                acc += wigner_operator(psi, A, cfg, x, grid.momentum(k, 1.0)) * dp;
            CHECK(max_abs_diff(acc, povm_position(psi, A, cfg, x)) < 1e-6);
        }
    }
    SUBCASE("∫dx W = F_p") {
        for (int k : {120, 128, 140}) {
            const double p = grid.momentum(k, 1.0);
            Matrix acc = Matrix::Zero(2, 2);
            for (int j = 0; j < grid.n_points; ++j)
                acc += wigner_operator(psi, A, cfg, grid.point(j), p) * grid.dx;
            CHECK(max_abs_diff(acc, povm_momentum(psi, A, cfg, p)) < 1e-6);
        }
    }
    SUBCASE("g = 0 reduces to the detector Wigner function times identity") {
        // Gaussian: W(x,p) = (1/πħ)e^{-x²/2σ²}e^{-2p²σ²/ħ²}
        const DetectorWavefunction pure = gaussian_state(grid, 1.0);
        for (int j : {110, 128, 150}) {
            for (int k : {120, 128, 136}) {
                const double x = grid.point(j), p = grid.momentum(k, 1.0);
                const Matrix w =
                    wigner_operator(pure, A, CouplingConfig{0.0, 1.0}, x, p);
                const double expected = std::exp(-x * x / 2.0 - 2.0 * p * p) /
                                        std::numbers::pi;
                CHECK(max_abs_diff(w, expected * identity(2)) < 1e-8);
            }
        }
    }
}

TEST_CASE("contextual values reconstruct the observable") {
    const PositionGrid grid = default_grid(1.0, 0.5, 512);
    const DetectorWavefunction psi = gaussian_state(grid, 1.0);

    SUBCASE("recentred and scaled values give A") {
        CHECK(max_abs_diff(
                  contextual_values_reconstruction(psi, sigma3(), {0.3, 1.0}),
                  sigma3()) < 1e-8);
        Rng rng(28);
        const Matrix A = random_hermitian(rng, 3);
        const PositionGrid wide = default_grid(1.0, 0.5 * 3.0, 512);
        const DetectorWavefunction chi = random_detector_state(rng, wide, 1.0, 1.0);
        CHECK(max_abs_diff(contextual_values_reconstruction(chi, A, {0.5, 1.0}), A) <
              1e-8);
    }
    SUBCASE("raw position values give <x>_0·1 + gA") {
        const DetectorWavefunction off = gaussian_state(grid, 1.0, 0.6);
        std::vector<double> raw(grid.n_points);
        for (int j = 0; j < grid.n_points; ++j) raw[j] = grid.point(j);
        const Matrix got = povm_position_weighted_sum(off, sigma3(), {0.3, 1.0}, raw);
        CHECK(max_abs_diff(got, mean_x_of(off) * identity(2) + 0.3 * sigma3()) < 1e-8);
    }
    SUBCASE("identity observable averages to the identity") {
        CHECK(max_abs_diff(
                  contextual_values_reconstruction(psi, identity(2), {0.4, 1.0}),
                  identity(2)) < 1e-8);
    }
    SUBCASE("g = 0 is rejected") {
        CHECK_THROWS_AS(contextual_values_reconstruction(psi, sigma3(), {0.0, 1.0}),
                        std::invalid_argument);
    }
}

TEST_CASE("nonselective map: identity channel at g = 0, dephasing for Gaussians") {
    Rng rng(29);
    const DensityOperator rho = random_density(rng, 2);

    CHECK(max_abs_diff(nonselective_map(rho, gaussian(), sigma3(), {0.0, 1.0}).mat(),
                       rho.mat()) < 1e-12);

    // qubit + Gaussian: off-diagonals damp by e^{-(Ag/σ)²/2} in the A basis
    for (double g : {0.3, 1.0, 2.0}) {
        const DensityOperator out =
            nonselective_map(rho, gaussian(), sigma3(), {g, 1.0});
        const double damp = std::exp(-g * g / 2.0);
        CHECK(std::abs(out.mat()(0, 1) - damp * rho.mat()(0, 1)) < 1e-8);
        CHECK(std::abs(out.mat()(0, 0) - rho.mat()(0, 0)) < 1e-12);
    }

    for (int trial = 0; trial < 5; ++trial) {
        const int dim = rng.integer(2, 4);
        const Matrix A = random_hermitian(rng, dim);
        const double max_eig = A.cwiseAbs().rowwise().sum().maxCoeff();
        const double g = rng.uniform(-1.0, 1.0);
        const PositionGrid grid = default_grid(1.0, std::abs(g) * max_eig, 512);
        const DetectorWavefunction psi = random_detector_state(rng, grid, 1.0, 1.0);
        const DensityOperator in = random_density(rng, dim);
        const DensityOperator out = nonselective_map(in, psi, A, {g, 1.0});
        CHECK(std::abs(out.mat().trace().real() - 1.0) < 1e-12);
    }
}

TEST_CASE("conditioned response: identity post-selection and degenerate errors") {
    const DetectorWavefunction psi = gaussian();
    const DensityOperator rho = DensityOperator::from_bloch({0.6, 0.0, 0.5});
    const CouplingConfig cfg{0.7, 1.0};

    const ConditionedResponse resp =
        conditioned_response(rho, psi, sigma3(), identity(2), cfg);
    CHECK(std::abs(resp.mean_x - cfg.g * 0.5) < 1e-8); // <A>_0 = r3
    CHECK(std::abs(resp.mean_p) < 1e-10);

    // orthogonal pure pre/post with g = 0
    CHECK_THROWS_AS(conditioned_response(DensityOperator{testutil::plus_x_state()},
                                         psi, sigma3(), testutil::minus_x_state(),
                                         CouplingConfig{0.0, 1.0}),
                    DegeneratePostSelection);
}

TEST_CASE("joint densities agree with the Kraus-operator route and marginalize") {
    Rng rng(30);
    const Matrix A = random_hermitian(rng, 2);
    const double max_eig = A.cwiseAbs().rowwise().sum().maxCoeff();
    const PositionGrid grid = default_grid(1.0, 0.9 * max_eig, 512);
    const DetectorWavefunction psi = random_detector_state(rng, grid, 1.0, 1.0);
    const CouplingConfig cfg{0.9, 1.0};
    const DensityOperator rho = random_density(rng, 2);
    const Matrix P = random_povm_element(rng, 2);

    const JointState joint = evolve_joint(rho, psi, A, cfg);
    const OutcomeDensities dens = joint_outcome_densities(joint, P);

    SUBCASE("p(x,f) = Tr[P_f M_x ρ M_x†]") {
        for (int j : {150, 256, 380}) {
            const Matrix m = kraus_position(psi, A, cfg, grid.point(j));
            const double via_kraus = (P * m * rho.mat() * m.adjoint()).trace().real();
            CHECK(dens.position[j] == doctest::Approx(via_kraus).epsilon(1e-10));
        }
    }
    SUBCASE("position and momentum probabilities agree") {
        double px = 0.0, pp = 0.0;
        for (int j = 0; j < grid.n_points; ++j) {
            px += dens.position[j] * dens.dx;
            pp += dens.momentum[j] * dens.dp;
        }
        CHECK(px == doctest::Approx(pp).epsilon(1e-10));
    }
    SUBCASE("marginalizing a complete post-selection set recovers p(x), p(p)") {
        const OutcomeDensities other =
            joint_outcome_densities(joint, Matrix(identity(2) - P));
        const OutcomeDensities total = joint_outcome_densities(joint, identity(2));
        double worst = 0.0;
        for (int j = 0; j < grid.n_points; ++j) {
            worst = std::max(worst, std::abs(dens.position[j] + other.position[j] -
                                             total.position[j]));
            worst = std::max(worst, std::abs(dens.momentum[j] + other.momentum[j] -
                                             total.momentum[j]));
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("conditioned response equals the operational trace forms") {
    Rng rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const int dim = rng.integer(2, 3);
        const Matrix A = random_hermitian(rng, dim);
        const double max_eig = A.cwiseAbs().rowwise().sum().maxCoeff();
        const double g = rng.uniform(-1.2, 1.2);
        const PositionGrid grid = default_grid(1.0, std::abs(g) * max_eig, 512);
        const DetectorWavefunction psi = random_detector_state(rng, grid, 1.0, 1.0);
        const CouplingConfig cfg{g, 1.0};
        const DensityOperator rho = random_density(rng, dim);
        const Matrix P = random_povm_element(rng, dim);

        const ConditionedResponse resp = conditioned_response(rho, psi, A, P, cfg);

        const AveragingMaps maps = averaging_maps(rho, psi, A, cfg);
        const Matrix e_rho = nonselective_apply(rho.mat(), psi, A, cfg);
        const double denom = (P * e_rho).trace().real();

        // direct operational form with the total maps
        CHECK(std::abs(resp.mean_x - (P * maps.x_total).trace().real() / denom) < 1e-9);
        CHECK(std::abs(resp.mean_p - (P * maps.p_total).trace().real() / denom) < 1e-9);

        // split form: initial-detector term plus the symmetrized A correction
        const Matrix sym = nonselective_apply(anticommutator(A, rho.mat()), psi, A, cfg);
        const double split_x = (P * maps.x_detector).trace().real() / denom +
                               cfg.g * (P * sym).trace().real() / (2.0 * denom);
        CHECK(std::abs(resp.mean_x - split_x) < 1e-9);
        CHECK(resp.post_prob == doctest::Approx(denom).epsilon(1e-10));
    }
}

TEST_CASE("averaging maps: traces, independent route, Gaussian closed form") {
    Rng rng(32);
    const DensityOperator rho = random_density(rng, 2);
    const double g = 0.8;
    const PositionGrid grid = default_grid(1.0, g, 512);
    const CouplingConfig cfg{g, 1.0};

    SUBCASE("traces give the unconditioned detector means") {
        const DetectorWavefunction psi = gaussian_state(grid, 1.0, 0.3, -0.2);
        const DetectorMoments m = moments(psi, 1);
        const AveragingMaps maps = averaging_maps(rho, psi, sigma3(), cfg);
        const double mean_a = (sigma3() * rho.mat()).trace().real();
        CHECK(std::abs(maps.x_total.trace().real() - (m.mean_x + g * mean_a)) < 1e-10);
        CHECK(std::abs(maps.p_total.trace().real() - m.mean_p) < 1e-10);
    }
    SUBCASE("symmetrized-product route matches the Heisenberg split") {
        const DetectorWavefunction psi = random_detector_state(rng, grid, 1.0, 1.0);
        const AveragingMaps maps = averaging_maps(rho, psi, sigma3(), cfg);
        const auto [x_map, p_map] = detector_correlation_maps(rho, psi, sigma3(), cfg);
        CHECK(max_abs_diff(maps.x_detector, x_map) < 1e-10);
        CHECK(max_abs_diff(maps.p_detector, p_map) < 1e-10);
    }
    SUBCASE("zero-mean Gaussian: X(ρ) = 0 and P(ρ) = (g/iħ)(ħ²/4σ²)(ad A)(E(ρ))") {
        const DetectorWavefunction psi = gaussian_state(grid, 1.0);
        const AveragingMaps maps = averaging_maps(rho, psi, sigma3(), cfg);
        CHECK(maps.x_detector.cwiseAbs().maxCoeff() < 1e-10);
        const Matrix e_rho = nonselective_apply(rho.mat(), psi, sigma3(), cfg);
        const Matrix expected =
            (g / kImag) * 0.25 * commutator(sigma3(), e_rho);
        CHECK(max_abs_diff(maps.p_detector, expected) < 1e-8);
    }
    SUBCASE("g = 0 with real ψ: X(ρ) = <x>_0·ρ") {
        const DetectorWavefunction psi = gaussian_state(grid, 1.0, 0.5);
        const AveragingMaps maps = averaging_maps(rho, psi, sigma3(), {0.0, 1.0});
        CHECK(max_abs_diff(maps.x_detector, mean_x_of(psi) * rho.mat()) < 1e-10);
    }
}

TEST_CASE("perturbative expansion terms and convergence to the exact maps") {
    Rng rng(33);
    const DensityOperator rho = random_density(rng, 2);
    const PositionGrid grid = default_grid(1.0, 0.5, 512);
    const DetectorWavefunction psi = gaussian_state(grid, 1.0, 0.2, 0.1);
    const CouplingConfig cfg{0.4, 1.0};
    const DetectorMoments m = moments(psi, 7);

    SUBCASE("order 0 reproduces (ρ, <x>_0·ρ, <p>_0·ρ)") {
        const ExpansionTerms t = expansion_term(rho, m, sigma3(), cfg, 0);
        CHECK(max_abs_diff(t.nonselective, rho.mat()) < 1e-14);
        CHECK(max_abs_diff(t.x_weighted, m.mean_x * rho.mat()) < 1e-14);
        CHECK(max_abs_diff(t.p_weighted, m.mean_p * rho.mat()) < 1e-14);
    }
    SUBCASE("order 1 nonselective term vanishes for real detectors") {
        const DetectorWavefunction real_psi = gaussian_state(grid, 1.0, 0.2);
        const ExpansionTerms t =
            expansion_term(rho, moments(real_psi, 2), sigma3(), cfg, 1);
        CHECK(t.nonselective.cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("partial sums converge to the exact channel (Ag/σ = 0.5)") {
        const DetectorWavefunction real_psi = gaussian_state(grid, 1.0);
        const CouplingConfig half{0.5, 1.0};
        const ExpansionTerms sum =
            expansion_partial_sum(rho, moments(real_psi, 7), sigma3(), half, 6);
        const Matrix exact = nonselective_apply(rho.mat(), real_psi, sigma3(), half);
        const AveragingMaps maps = averaging_maps(rho, real_psi, sigma3(), half);
        CHECK(max_abs_diff(sum.nonselective, exact) < 1e-5);
        CHECK(max_abs_diff(sum.x_weighted, maps.x_detector) < 1e-5);
        // the momentum series runs one moment order ahead, so its first
        // omitted term is larger
        CHECK(max_abs_diff(sum.p_weighted, maps.p_detector) < 1e-4);
    }
    SUBCASE("moment order bound is enforced") {
        CHECK_THROWS_AS(expansion_term(rho, m, sigma3(), cfg, 7),
                        std::invalid_argument);
        CHECK_THROWS_AS(expansion_term(rho, moments(psi, 3), sigma3(), cfg, 4),
                        std::invalid_argument);
    }
}

TEST_CASE("retrodictive response equals the predictive one") {
    Rng rng(34);
    for (int trial = 0; trial < 8; ++trial) {
        const int dim = rng.integer(2, 3);
        const Matrix A = random_hermitian(rng, dim);
        const double max_eig = A.cwiseAbs().rowwise().sum().maxCoeff();
        const double g = rng.uniform(-1.5, 1.5);
        const PositionGrid grid = default_grid(1.0, std::abs(g) * max_eig, 512);
        const DetectorWavefunction psi = random_detector_state(rng, grid, 1.0, 1.0);
        const CouplingConfig cfg{g, 1.0};
        const DensityOperator rho = random_density(rng, dim);
        const Matrix P = trial % 2 == 0 ? random_projector(rng, dim)
                                        : random_povm_element(rng, dim);

        ConditionedResponse pred;
        try {
            pred = conditioned_response(rho, psi, A, P, cfg);
        } catch (const DegeneratePostSelection&) {
            continue; // resample; both routes would diverge
        }
        const ConditionedResponse retro = retrodictive_response(rho, psi, A, P, cfg);
        CHECK(std::abs(pred.mean_x - retro.mean_x) < 1e-8);
        CHECK(std::abs(pred.mean_p - retro.mean_p) < 1e-8);
        CHECK(pred.post_prob == doctest::Approx(retro.post_prob).epsilon(1e-8));
    }
}
