// random_states.hpp - seeded generators for randomized property checks

#pragma once

#include "vnmeas/detector.hpp"
#include "vnmeas/operators.hpp"

#include <cstdint>
#include <random>

namespace vnmeas {

struct Rng {
    std::mt19937_64 engine;
    explicit Rng(std::uint64_t seed) : engine(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine);
    }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine); }
    Complex cnormal() { return {normal(), normal()}; }
    int integer(int lo, int hi) { // inclusive
        return std::uniform_int_distribution<int>(lo, hi)(engine);
    }
};

Matrix random_hermitian(Rng& rng, int dim, double scale = 1.0);
Vector random_ket(Rng& rng, int dim);
Matrix random_projector(Rng& rng, int dim);    // rank-1
Matrix random_povm_element(Rng& rng, int dim); // 0 <= P <= 1, full rank
DensityOperator random_density(Rng& rng, int dim);
BlochVector random_bloch(Rng& rng, double max_norm = 0.95);

// Two-component Gaussian superposition with a random relative phase and an
// optional momentum boost; a generic non-Gaussian detector state.
DetectorWavefunction random_detector_state(Rng& rng, const PositionGrid& grid,
                                           double sigma, double hbar);

} // namespace vnmeas
