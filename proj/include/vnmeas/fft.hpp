// fft.hpp - FFTW-backed complex DFT with a mutex-guarded plan cache

#pragma once

#include "vnmeas/operators.hpp"

namespace vnmeas::fft {

// out[k] = Σ_j in[j] e^{-2πi kj/N}, unnormalized.
Vector forward(const Vector& in);

// out[j] = Σ_k in[k] e^{+2πi kj/N}, unnormalized.
Vector backward(const Vector& in);

} // namespace vnmeas::fft
