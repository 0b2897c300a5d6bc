#pragma once

#include <complex>
#include <span>
#include <vector>

namespace asca::dsp {

// In-place iterative radix-2 FFT; size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a);

// Forward DFT of a real frame. Uses the radix-2 path for power-of-two sizes
// and the direct O(n^2) sum otherwise.
std::vector<std::complex<double>> dft(std::span<const double> frame);

// Magnitudes of the one-sided spectrum (n/2 + 1 bins).
std::vector<double> magnitude_spectrum(std::span<const double> frame);

// Periodic Hann window.
std::vector<double> hann_window(std::size_t n);

}  // namespace asca::dsp
