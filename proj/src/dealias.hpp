#pragma once

#include <algorithm>
#include <span>

#include "envlab/types.hpp"

namespace envlab::detail {

/// Copy an n-mode spectrum (natural FFT order) into an m-mode buffer, m >= n,
/// zero-filling the new modes.
inline void pad_spectrum(std::span<const cplx> in, std::span<cplx> out) {
  const std::size_t n = in.size();
  const std::size_t m = out.size();
  std::fill(out.begin(), out.end(), cplx(0.0, 0.0));
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < half; ++i) out[i] = in[i];
  for (std::size_t i = half; i < n; ++i) out[m - n + i] = in[i];
}

/// Inverse of pad_spectrum: keep the n modes retained by the smaller grid.
inline void truncate_spectrum(std::span<const cplx> in, std::span<cplx> out) {
  const std::size_t n = out.size();
  const std::size_t m = in.size();
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < half; ++i) out[i] = in[i];
  for (std::size_t i = half; i < n; ++i) out[i] = in[m - n + i];
}

/// Conjugate in spectral space: out_j = conj(in_{-j}) with indices mod n.
inline void conj_spectrum(std::span<const cplx> in, std::span<cplx> out) {
  const std::size_t n = in.size();
  for (std::size_t i = 0; i < n; ++i) out[i] = std::conj(in[(n - i) % n]);
}

}  // namespace envlab::detail
