#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace cssfn::fft {

using Complex = std::complex<double>;

/// Unnormalised forward 2D DFT of a row-major (h, w) complex grid.
std::vector<Complex> forward2d(const std::vector<Complex>& grid, std::size_t h, std::size_t w);
/// Inverse 2D DFT including the 1/(h*w) factor.
std::vector<Complex> inverse2d(const std::vector<Complex>& spectrum, std::size_t h, std::size_t w);

/// Signed frequency of DFT bin k on an n-point grid, in [-n/2, n/2).
inline long signed_frequency(std::size_t k, std::size_t n) {
  const auto kk = static_cast<long>(k);
  const auto nn = static_cast<long>(n);
  return kk < (nn + 1) / 2 ? kk : kk - nn;
}

/// Bin index of signed frequency f on an n-point grid.
inline std::size_t bin_of(long f, std::size_t n) {
  const auto nn = static_cast<long>(n);
  return static_cast<std::size_t>(((f % nn) + nn) % nn);
}

}  // namespace cssfn::fft
