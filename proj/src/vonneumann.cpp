// vonneumann.cpp - joint-state evolution, Kraus/POVM layer, channels

#include "vnmeas/vonneumann.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <string>

namespace vnmeas {

namespace {

constexpr double kPi = std::numbers::pi;

void require_hbar_match(const DetectorWavefunction& psi, const CouplingConfig& cfg) {
    if (!(cfg.hbar > 0.0))
        throw std::invalid_argument("CouplingConfig: hbar must be > 0");
    if (std::abs(psi.hbar - cfg.hbar) > 1e-12 * cfg.hbar)
        throw std::invalid_argument("CouplingConfig: hbar differs from the detector state");
}

// Eigenbasis of A together with the per-eigenvalue translated detector
// amplitudes; everything in this module reduces to sums over these branches.
struct SpectralCoupling {
    Matrix basis;         // columns: eigenvectors of A
    Eigen::VectorXd eigs; // a_k
    std::vector<Vector> branches; // ψ(x - g·a_k)
    PositionGrid grid;
    double hbar = 1.0;
    double g = 0.0;
};

SpectralCoupling make_coupling(const DetectorWavefunction& psi, const Matrix& A,
                               const CouplingConfig& cfg, bool guard = true) {
    require_hermitian(A, "von Neumann coupling");
    require_hbar_match(psi, cfg);
    if (std::abs(psi.norm_squared() - 1.0) > 1e-10)
        throw std::invalid_argument("von Neumann coupling: detector state not normalized");

    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("von Neumann coupling: eigensolve failed");

    SpectralCoupling sc;
    sc.basis = es.eigenvectors();
    sc.eigs = es.eigenvalues();
    sc.grid = psi.grid;
    sc.hbar = psi.hbar;
    sc.g = cfg.g;
    sc.branches.reserve(A.rows());
    for (Eigen::Index k = 0; k < A.rows(); ++k) {
        sc.branches.push_back(translated(psi.grid, psi.amplitudes, psi.hbar,
                                         cfg.g * sc.eigs(k)));
        if (guard) check_wrap_guard(psi.grid, sc.branches.back());
    }
    return sc;
}

// G_kl = Σ_j w_j a_k(j) conj(b_l(j)) · step
Matrix cross_gram(const std::vector<Vector>& a, const std::vector<Vector>& b,
                  const std::vector<double>* weights, double step) {
    const Eigen::Index d = static_cast<Eigen::Index>(a.size());
    Matrix g(d, d);
    for (Eigen::Index k = 0; k < d; ++k)
        for (Eigen::Index l = 0; l < d; ++l) {
            Complex acc = 0.0;
            const Vector& u = a[k];
            const Vector& v = b[l];
            if (weights) {
                for (Eigen::Index j = 0; j < u.size(); ++j)
                    acc += (*weights)[j] * u(j) * std::conj(v(j));
            } else {
                acc = v.dot(u); // Σ conj(v) u
            }
            g(k, l) = acc * step;
        }
    return g;
}

// Channel application in the eigenbasis: op ↦ V [(V† op V) ∘ coeff] V†.
Matrix apply_in_eigenbasis(const SpectralCoupling& sc, const Matrix& op,
                           const Matrix& coeff) {
    const Matrix tilde = sc.basis.adjoint() * op * sc.basis;
    return sc.basis * tilde.cwiseProduct(coeff) * sc.basis.adjoint();
}

// Spectral ensemble of a density operator; small |weights| are kept because
// every use is linear in ρ.
struct Ensemble {
    std::vector<double> weights;
    std::vector<Vector> states;
};

Ensemble spectral_ensemble(const DensityOperator& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.mat());
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spectral_ensemble: eigensolve failed");
    Ensemble e;
    for (Eigen::Index m = 0; m < rho.dim(); ++m) {
        const double w = es.eigenvalues()(m);
        if (std::abs(w) < 1e-15) continue;
        e.weights.push_back(w);
        e.states.push_back(es.eigenvectors().col(m));
    }
    return e;
}

void require_povm_element(const Matrix& p, Eigen::Index dim, const char* who) {
    require_hermitian(p, who);
    if (p.rows() != dim)
        throw std::invalid_argument(std::string(who) + ": post-selection dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> es(p);
    if (es.eigenvalues().minCoeff() < -1e-10 || es.eigenvalues().maxCoeff() > 1.0 + 1e-10)
        throw std::invalid_argument(std::string(who) +
                                    ": post-selection must satisfy 0 <= P_f <= 1");
}

} // namespace

JointState evolve_joint(const DensityOperator& rho_i, const DetectorWavefunction& psi,
                        const Matrix& A, const CouplingConfig& cfg) {
    require_same_dim(A, rho_i.mat(), "evolve_joint");
    const SpectralCoupling sc = make_coupling(psi, A, cfg);
    const Ensemble ens = spectral_ensemble(rho_i);
    const Eigen::Index d = A.rows();
    const int n = psi.grid.n_points;

    JointState joint;
    joint.system_dim = static_cast<int>(d);
    joint.grid = psi.grid;
    joint.hbar = psi.hbar;
    joint.members.reserve(ens.weights.size());
    for (std::size_t m = 0; m < ens.weights.size(); ++m) {
        const Vector c = sc.basis.adjoint() * ens.states[m];
        Eigen::MatrixXcd amp = Eigen::MatrixXcd::Zero(d, n);
        for (Eigen::Index k = 0; k < d; ++k)
            amp.noalias() += (sc.basis.col(k) * c(k)) * sc.branches[k].transpose();
        joint.members.push_back({ens.weights[m], std::move(amp)});
    }
    return joint;
}

OutcomeDensities joint_outcome_densities(const JointState& joint, const Matrix& P_f) {
    require_povm_element(P_f, joint.system_dim, "joint_outcome_densities");
    const int n = joint.grid.n_points;
    OutcomeDensities out;
    out.dx = joint.grid.dx;
    out.dp = joint.grid.momentum_step(joint.hbar);
    out.position.assign(n, 0.0);
    out.momentum.assign(n, 0.0);

    for (const EnsembleMember& m : joint.members) {
        for (int j = 0; j < n; ++j) {
            const auto col = m.amplitudes.col(j);
            out.position[j] += m.weight * (col.adjoint() * P_f * col)(0).real();
        }
        // momentum rows via the same unitary transform as the detector module
        Eigen::MatrixXcd mom(m.amplitudes.rows(), n);
        for (Eigen::Index s = 0; s < m.amplitudes.rows(); ++s)
            mom.row(s) =
                position_to_momentum(joint.grid, m.amplitudes.row(s).transpose(),
                                     joint.hbar)
                    .transpose();
        for (int k = 0; k < n; ++k) {
            const auto col = mom.col(k);
            out.momentum[k] += m.weight * (col.adjoint() * P_f * col)(0).real();
        }
    }
    return out;
}

ConditionedResponse conditioned_response(const DensityOperator& rho_i,
                                         const DetectorWavefunction& psi,
                                         const Matrix& A, const Matrix& P_f,
                                         const CouplingConfig& cfg, double prob_floor) {
    const JointState joint = evolve_joint(rho_i, psi, A, cfg);
    const OutcomeDensities dens = joint_outcome_densities(joint, P_f);

    double prob = 0.0, x_acc = 0.0, p_acc = 0.0;
    for (int j = 0; j < joint.grid.n_points; ++j) {
        prob += dens.position[j] * dens.dx;
        x_acc += joint.grid.point(j) * dens.position[j] * dens.dx;
        p_acc += joint.grid.momentum(j, joint.hbar) * dens.momentum[j] * dens.dp;
    }
    if (prob < prob_floor)
        throw DegeneratePostSelection("conditioned_response: post-selection probability " +
                                      std::to_string(prob) + " below floor");
    return {x_acc / prob, p_acc / prob, prob};
}

Matrix kraus_position(const DetectorWavefunction& psi, const Matrix& A,
                      const CouplingConfig& cfg, double x) {
    const SpectralCoupling sc = make_coupling(psi, A, cfg);
    const int j = psi.grid.index_of(x);
    Vector d(A.rows());
    for (Eigen::Index k = 0; k < A.rows(); ++k) d(k) = sc.branches[k](j);
    return sc.basis * d.asDiagonal() * sc.basis.adjoint();
}

Matrix povm_position(const DetectorWavefunction& psi, const Matrix& A,
                     const CouplingConfig& cfg, double x) {
    const SpectralCoupling sc = make_coupling(psi, A, cfg);
    const int j = psi.grid.index_of(x);
    Vector d(A.rows());
    for (Eigen::Index k = 0; k < A.rows(); ++k) d(k) = std::norm(sc.branches[k](j));
    return sc.basis * d.asDiagonal() * sc.basis.adjoint();
}

Matrix kraus_momentum(const DetectorWavefunction& psi, const Matrix& A,
                      const CouplingConfig& cfg, double p) {
    require_hermitian(A, "kraus_momentum");
    require_hbar_match(psi, cfg);
    const MomentumAmplitudes mom = momentum_representation(psi);
    const int k = psi.grid.momentum_index_of(p, psi.hbar);

    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    Vector d(A.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        d(i) = std::polar(1.0, -cfg.g * p * es.eigenvalues()(i) / cfg.hbar);
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint() *
           mom.amplitudes(k);
}

Matrix povm_momentum(const DetectorWavefunction& psi, const Matrix& A,
                     const CouplingConfig& cfg, double p) {
    require_hermitian(A, "povm_momentum");
    require_hbar_match(psi, cfg);
    const MomentumAmplitudes mom = momentum_representation(psi);
    const int k = psi.grid.momentum_index_of(p, psi.hbar);
    return std::norm(mom.amplitudes(k)) * identity(A.rows());
}

Matrix wigner_operator(const DetectorWavefunction& psi, const Matrix& A,
                       const CouplingConfig& cfg, double x, double p) {
    require_hermitian(A, "wigner_operator");
    require_hbar_match(psi, cfg);
    psi.grid.index_of(x);                      // validate on coarse grid
    psi.grid.momentum_index_of(p, psi.hbar);   // validate on conjugate grid

    const DetectorWavefunction fine = upsampled2(psi);
    const SpectralCoupling sc =
        make_coupling(fine, A, cfg, /*guard=*/false); // guard already ran on psi

    const int u0 = fine.grid.index_of(x);
    const int n_fine = fine.grid.n_points;
    const double dy = fine.grid.dx;
    const int reach = std::min(u0, n_fine - 1 - u0);

    Vector w = Vector::Zero(A.rows());
    for (int j = -reach; j <= reach; ++j) {
        const double y = j * dy;
        const Complex phase = std::polar(1.0, 2.0 * p * y / cfg.hbar);
        for (Eigen::Index k = 0; k < A.rows(); ++k)
            w(k) += phase * std::conj(sc.branches[k](u0 + j)) * sc.branches[k](u0 - j);
    }
    w *= dy / (kPi * cfg.hbar);
    return sc.basis * w.asDiagonal() * sc.basis.adjoint();
}

Matrix povm_position_weighted_sum(const DetectorWavefunction& psi, const Matrix& A,
                                  const CouplingConfig& cfg,
                                  const std::vector<double>& values) {
    if (static_cast<int>(values.size()) != psi.grid.n_points)
        throw std::invalid_argument("povm_position_weighted_sum: values size mismatch");
    const SpectralCoupling sc = make_coupling(psi, A, cfg);
    Vector d = Vector::Zero(A.rows());
    for (Eigen::Index k = 0; k < A.rows(); ++k) {
        double acc = 0.0;
        for (int j = 0; j < psi.grid.n_points; ++j)
            acc += values[j] * std::norm(sc.branches[k](j));
        d(k) = acc * psi.grid.dx;
    }
    return sc.basis * d.asDiagonal() * sc.basis.adjoint();
}

Matrix contextual_values_reconstruction(const DetectorWavefunction& psi,
                                        const Matrix& A, const CouplingConfig& cfg) {
    if (cfg.g == 0.0)
        throw std::invalid_argument(
            "contextual_values_reconstruction: g = 0 leaves the values undefined");
    double mean_x0 = 0.0;
    for (int j = 0; j < psi.grid.n_points; ++j)
        mean_x0 += psi.grid.point(j) * std::norm(psi.amplitudes(j)) * psi.grid.dx;

    std::vector<double> values(psi.grid.n_points);
    for (int j = 0; j < psi.grid.n_points; ++j)
        values[j] = (psi.grid.point(j) - mean_x0) / cfg.g;
    return povm_position_weighted_sum(psi, A, cfg, values);
}

Matrix nonselective_apply(const Matrix& op, const DetectorWavefunction& psi,
                          const Matrix& A, const CouplingConfig& cfg) {
    require_same_dim(A, op, "nonselective_apply");
    const SpectralCoupling sc = make_coupling(psi, A, cfg);
    const Matrix gram = cross_gram(sc.branches, sc.branches, nullptr, psi.grid.dx);
    return apply_in_eigenbasis(sc, op, gram);
}

DensityOperator nonselective_map(const DensityOperator& rho_i,
                                 const DetectorWavefunction& psi, const Matrix& A,
                                 const CouplingConfig& cfg) {
    Matrix out = nonselective_apply(rho_i.mat(), psi, A, cfg);
    out = 0.5 * (out + out.adjoint());
    return DensityOperator(std::move(out));
}

namespace {

// All the averaging-map Grams over the same translated branch set.
struct MapGrams {
    SpectralCoupling sc;
    Matrix plain;    // Σ br_k conj(br_l) dx
    Matrix x_total;  // Σ x_j br_k conj(br_l) dx
    Matrix p_total;  // Σ p_k' m̃br_k conj(m̃br_l) dp
    Matrix x_init;   // symmetrized Σ (xψ)-branch_k conj(br_l) dx
    Matrix p_init;   // symmetrized Σ (pψ)-branch_k conj(br_l) dx
};

MapGrams make_map_grams(const DetectorWavefunction& psi, const Matrix& A,
                        const CouplingConfig& cfg) {
    MapGrams mg{make_coupling(psi, A, cfg), {}, {}, {}, {}, {}};
    const SpectralCoupling& sc = mg.sc;
    const int n = psi.grid.n_points;
    const Eigen::Index d = A.rows();

    mg.plain = cross_gram(sc.branches, sc.branches, nullptr, psi.grid.dx);

    std::vector<double> xw(n), pw(n);
    for (int j = 0; j < n; ++j) xw[j] = psi.grid.point(j);
    for (int k = 0; k < n; ++k) pw[k] = psi.grid.momentum(k, psi.hbar);

    mg.x_total = cross_gram(sc.branches, sc.branches, &xw, psi.grid.dx);

    std::vector<Vector> mom_branches(d);
    for (Eigen::Index k = 0; k < d; ++k)
        mom_branches[k] = position_to_momentum(psi.grid, sc.branches[k], psi.hbar);
    mg.p_total = cross_gram(mom_branches, mom_branches, &pw,
                            psi.grid.momentum_step(psi.hbar));

    // branches of x̂ψ and p̂ψ (not normalized; the maps are linear)
    Vector xpsi(n);
    for (int j = 0; j < n; ++j) xpsi(j) = psi.grid.point(j) * psi.amplitudes(j);
    const Vector ppsi = momentum_power_applied(psi, 1);
    std::vector<Vector> xbr(d), pbr(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        xbr[k] = translated(psi.grid, xpsi, psi.hbar, cfg.g * sc.eigs(k));
        pbr[k] = translated(psi.grid, ppsi, psi.hbar, cfg.g * sc.eigs(k));
    }
    const Matrix gx = cross_gram(xbr, sc.branches, nullptr, psi.grid.dx);
    const Matrix gp = cross_gram(pbr, sc.branches, nullptr, psi.grid.dx);
    mg.x_init = 0.5 * (gx + gx.adjoint());
    mg.p_init = 0.5 * (gp + gp.adjoint());
    return mg;
}

} // namespace

AveragingMaps averaging_maps(const DensityOperator& rho_i,
                             const DetectorWavefunction& psi, const Matrix& A,
                             const CouplingConfig& cfg) {
    require_same_dim(A, rho_i.mat(), "averaging_maps");
    const MapGrams mg = make_map_grams(psi, A, cfg);
    AveragingMaps out;
    out.x_total = apply_in_eigenbasis(mg.sc, rho_i.mat(), mg.x_total);
    out.p_total = apply_in_eigenbasis(mg.sc, rho_i.mat(), mg.p_total);
    const Matrix sym = 0.5 * anticommutator(A, rho_i.mat());
    out.x_detector = out.x_total - cfg.g * apply_in_eigenbasis(mg.sc, sym, mg.plain);
    out.p_detector = out.p_total;
    return out;
}

std::pair<Matrix, Matrix> detector_correlation_maps(const DensityOperator& rho_i,
                                                    const DetectorWavefunction& psi,
                                                    const Matrix& A,
                                                    const CouplingConfig& cfg) {
    require_same_dim(A, rho_i.mat(), "detector_correlation_maps");
    const MapGrams mg = make_map_grams(psi, A, cfg);
    return {apply_in_eigenbasis(mg.sc, rho_i.mat(), mg.x_init),
            apply_in_eigenbasis(mg.sc, rho_i.mat(), mg.p_init)};
}

Matrix adjoint_nonselective(const Matrix& op_f, const DetectorWavefunction& psi,
                            const Matrix& A, const CouplingConfig& cfg) {
    require_same_dim(A, op_f, "adjoint_nonselective");
    const SpectralCoupling sc = make_coupling(psi, A, cfg);
    const Matrix gram = cross_gram(sc.branches, sc.branches, nullptr, psi.grid.dx);
    return apply_in_eigenbasis(sc, op_f, gram.conjugate());
}

std::pair<Matrix, Matrix> adjoint_correlation_maps(const Matrix& op_f,
                                                   const DetectorWavefunction& psi,
                                                   const Matrix& A,
                                                   const CouplingConfig& cfg) {
    require_same_dim(A, op_f, "adjoint_correlation_maps");
    const MapGrams mg = make_map_grams(psi, A, cfg);
    return {apply_in_eigenbasis(mg.sc, op_f, mg.x_init.conjugate()),
            apply_in_eigenbasis(mg.sc, op_f, mg.p_init.conjugate())};
}

ConditionedResponse retrodictive_response(const DensityOperator& rho_i,
                                          const DetectorWavefunction& psi,
                                          const Matrix& A, const Matrix& P_f,
                                          const CouplingConfig& cfg,
                                          double prob_floor) {
    require_same_dim(A, rho_i.mat(), "retrodictive_response");
    require_povm_element(P_f, rho_i.dim(), "retrodictive_response");
    const double trace_pf = P_f.trace().real();
    if (trace_pf <= 0.0)
        throw std::invalid_argument("retrodictive_response: Tr[P_f] must be > 0");
    const Matrix rho_f = P_f / trace_pf;

    const MapGrams mg = make_map_grams(psi, A, cfg);
    const Matrix e_adj = apply_in_eigenbasis(mg.sc, rho_f, mg.plain.conjugate());
    const Matrix x_adj = apply_in_eigenbasis(mg.sc, rho_f, mg.x_init.conjugate());
    const Matrix p_adj = apply_in_eigenbasis(mg.sc, rho_f, mg.p_init.conjugate());

    const double denom = (e_adj * rho_i.mat()).trace().real();
    const double prob = trace_pf * denom;
    if (prob < prob_floor)
        throw DegeneratePostSelection("retrodictive_response: post-selection probability " +
                                      std::to_string(prob) + " below floor");

    const double x_corr = (x_adj * rho_i.mat()).trace().real() / denom;
    const double sym =
        0.5 * (anticommutator(e_adj, A) * rho_i.mat()).trace().real() / denom;
    const double p_corr = (p_adj * rho_i.mat()).trace().real() / denom;
    return {x_corr + cfg.g * sym, p_corr, prob};
}

ExpansionTerms expansion_term(const DensityOperator& rho_i, const DetectorMoments& m,
                              const Matrix& A, const CouplingConfig& cfg, int n) {
    require_same_dim(A, rho_i.mat(), "expansion_term");
    if (n < 0 || n > 6)
        throw std::invalid_argument("expansion_term: order must be in [0, 6]");
    if (m.max_order() < n + 1)
        throw std::invalid_argument("expansion_term: moments required to order n+1");

    const Complex base = cfg.g / (kImag * cfg.hbar);
    Complex pref = 1.0;
    for (int k = 1; k <= n; ++k) pref *= base / static_cast<double>(k);
    const Matrix ad_n = adjoint_action(A, rho_i.mat(), n);

    ExpansionTerms t;
    t.nonselective = pref * m.p_moments[n] * ad_n;
    t.x_weighted = pref * m.sym_moments[n] * ad_n;
    t.p_weighted = pref * m.p_moments[n + 1] * ad_n;
    return t;
}

ExpansionTerms expansion_term(const DensityOperator& rho_i,
                              const DetectorWavefunction& psi, const Matrix& A,
                              const CouplingConfig& cfg, int n) {
    require_hbar_match(psi, cfg);
    return expansion_term(rho_i, moments(psi, std::min(n + 1, 8)), A, cfg, n);
}

ExpansionTerms expansion_partial_sum(const DensityOperator& rho_i,
                                     const DetectorMoments& m, const Matrix& A,
                                     const CouplingConfig& cfg, int max_order) {
    ExpansionTerms sum = expansion_term(rho_i, m, A, cfg, 0);
    for (int n = 1; n <= max_order; ++n) {
        const ExpansionTerms t = expansion_term(rho_i, m, A, cfg, n);
        sum.nonselective += t.nonselective;
        sum.x_weighted += t.x_weighted;
        sum.p_weighted += t.p_weighted;
    }
    return sum;
}

} // namespace vnmeas
