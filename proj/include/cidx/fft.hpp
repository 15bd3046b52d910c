#pragma once

// Thin FFTW wrappers. Plans are cached per size; execution is thread-safe.

#include <complex>
#include <vector>

namespace cidx::fft {

using cplx = std::complex<double>;

// X_k = sum_j x_j exp(-2 pi i j k / n), k = 0..n/2.
std::vector<cplx> forward_real(const std::vector<double>& x);

// x_j = sum_{k=0}^{n-1} X_k exp(+2 pi i j k / n) for Hermitian X given as its first n/2+1 terms.
std::vector<double> backward_real(const std::vector<cplx>& half, int n);

// In-place complex transform; sign -1 is exp(-2 pi i jk/n), +1 is exp(+2 pi i jk/n). Unnormalized.
void complex_inplace(std::vector<cplx>& x, int sign);

}  // namespace cidx::fft
