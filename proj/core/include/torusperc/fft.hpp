#pragma once

#include <complex>
#include <vector>

#include "torusperc/grid.hpp"

namespace torusperc {

// Forward/inverse DFT on the torus grid, row-major layout matching TorusGrid::index.
// The inverse applies the 1/N scaling, so ifft(fft(x)) == x up to roundoff.
std::vector<std::complex<double>> fft(const TorusGrid& grid, const std::vector<std::complex<double>>& in);
std::vector<std::complex<double>> ifft(const TorusGrid& grid, const std::vector<std::complex<double>>& in);

std::vector<std::complex<double>> fft_real(const TorusGrid& grid, const std::vector<double>& in);

// Real part of the inverse transform. Callers use this when the spectrum is
// Hermitian by construction; the imaginary residue is discarded.
std::vector<double> ifft_real(const TorusGrid& grid, const std::vector<std::complex<double>>& in);

// Circular convolution (a * b)[i] = sum_j a[j] b[i-j], indices wrapped per axis.
// No quadrature weight; callers multiply by cell volume where the continuum
// integral is intended.
std::vector<double> circular_convolve(const TorusGrid& grid, const std::vector<double>& a,
                                      const std::vector<double>& b);

}  // namespace torusperc
