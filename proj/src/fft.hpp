#pragma once

#include <cstddef>
#include <span>

#include "envlab/types.hpp"

namespace envlab::fft {

// Buffers passed here must come from ComplexVector (64-byte aligned) and
// must not alias. Any size FFTW supports is accepted.

/// out_j = (1/n) * sum_m in_m * exp(-2*pi*i*j*m/n)
void forward(std::span<const cplx> in, std::span<cplx> out);

/// out_m = sum_j in_j * exp(+2*pi*i*j*m/n)
void backward(std::span<const cplx> in, std::span<cplx> out);

/// Smallest 2^a * 3^b * 5^c that is >= n.
std::size_t next_smooth_size(std::size_t n);

}  // namespace envlab::fft
