// random_states.cpp

#include "vnmeas/random_states.hpp"

#include <cmath>

namespace vnmeas {

Matrix random_hermitian(Rng& rng, int dim, double scale) {
    Matrix g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = rng.cnormal();
    return scale * 0.5 * (g + g.adjoint());
}

Vector random_ket(Rng& rng, int dim) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = rng.cnormal();
    return v / v.norm();
}

Matrix random_projector(Rng& rng, int dim) {
    const Vector v = random_ket(rng, dim);
    return v * v.adjoint();
}

Matrix random_povm_element(Rng& rng, int dim) {
    Matrix g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = rng.cnormal();
    Matrix p = g * g.adjoint();
    p /= (p.cwiseAbs().rowwise().sum().maxCoeff() * 1.01); // force spectrum into [0,1)
    return p;
}

DensityOperator random_density(Rng& rng, int dim) {
    Matrix g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = rng.cnormal();
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint());
    return DensityOperator(std::move(rho));
}

BlochVector random_bloch(Rng& rng, double max_norm) {
    while (true) {
        BlochVector r{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                      rng.uniform(-1.0, 1.0)};
        if (r.squared_norm() <= max_norm * max_norm) return r;
    }
}

DetectorWavefunction random_detector_state(Rng& rng, const PositionGrid& grid,
                                           double sigma, double hbar) {
    grid.validate();
    // lobe widths and offsets stay within the clearance default_grid(sigma)
    // reserves, so the edge guard holds for every generated state
    const double split = rng.uniform(0.3, 0.9) * sigma;
    const double w1 = rng.uniform(0.6, 0.95) * sigma;
    const double w2 = rng.uniform(0.6, 0.95) * sigma;
    const double mix = rng.uniform(0.3, 0.7);
    const double phase = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    const double boost = rng.uniform(-0.3, 0.3) * hbar / sigma;

    DetectorWavefunction psi;
    psi.grid = grid;
    psi.hbar = hbar;
    psi.amplitudes.resize(grid.n_points);
    for (int j = 0; j < grid.n_points; ++j) {
        const double x = grid.point(j);
        const Complex lobe1 =
            std::exp(Complex(-(x - split) * (x - split) / (4.0 * w1 * w1), 0.0));
        const Complex lobe2 = std::polar(1.0, phase + boost * x / hbar) *
                              std::exp(-(x + split) * (x + split) / (4.0 * w2 * w2));
        psi.amplitudes(j) = std::sqrt(mix) * lobe1 + std::sqrt(1.0 - mix) * lobe2;
    }
    psi.amplitudes /= std::sqrt(psi.norm_squared());
    return psi;
}

} // namespace vnmeas
