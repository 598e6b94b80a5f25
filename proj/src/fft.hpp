#pragma once

#include <span>

#include "torus/spectral.hpp"

namespace torus::detail {

// out[k] = sum_j in[j] exp(-2 pi i j k / M), k = 0..M/2
void rfft(std::span<const double> in, std::span<cplx> out);
// out[j] = sum_k in[k] exp(2 pi i j k / M) over the full Hermitian spectrum; in is clobbered
void irfft(std::span<cplx> in, std::span<double> out);

int next_pow2(int n);

}  // namespace torus::detail
