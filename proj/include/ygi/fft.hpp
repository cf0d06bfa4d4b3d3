#pragma once

#include <complex>
#include <span>

namespace ygi::fft {

// In-place unnormalized 2-D DFT of a row-major n x n array. The inverse
// transform divides by n*n so that inverse(forward(x)) == x.
void forward2d(std::span<std::complex<double>> data, int n);
void inverse2d(std::span<std::complex<double>> data, int n);

// Swap quadrants so that index (0,0) moves to (n/2, n/2), and back.
void fftshift(std::span<std::complex<double>> data, int n);
void ifftshift(std::span<std::complex<double>> data, int n);

}  // namespace ygi::fft
