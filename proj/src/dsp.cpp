#include "asca/dsp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace asca::dsp {

namespace {
bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }
}  // namespace

void fft_inplace(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (!is_pow2(n)) throw std::invalid_argument("fft_inplace: size must be a power of two");
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  // Explicit real/imag butterflies; std::complex multiplication routes
  // through the NaN-propagating helper and is several times slower.
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const double wr = std::cos(ang), wi = std::sin(ang);
    for (std::size_t i = 0; i < n; i += len) {
      double cr = 1.0, ci = 0.0;
      for (std::size_t k = 0; k < len / 2; ++k) {
        auto& x = a[i + k];
        auto& y = a[i + k + len / 2];
        const double yr = y.real() * cr - y.imag() * ci;
        const double yi = y.real() * ci + y.imag() * cr;
        y = {x.real() - yr, x.imag() - yi};
        x = {x.real() + yr, x.imag() + yi};
        const double nr = cr * wr - ci * wi;
        ci = cr * wi + ci * wr;
        cr = nr;
      }
    }
  }
}

std::vector<std::complex<double>> dft(std::span<const double> frame) {
  const std::size_t n = frame.size();
  if (n == 0) throw std::invalid_argument("dft: empty frame");
  if (is_pow2(n)) {
    std::vector<std::complex<double>> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = frame[i];
    fft_inplace(a);
    return a;
  }
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) *
                         static_cast<double>(t) / static_cast<double>(n);
      acc += frame[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

std::vector<double> magnitude_spectrum(std::span<const double> frame) {
  const auto spec = dft(frame);
  std::vector<double> mags(frame.size() / 2 + 1);
  for (std::size_t k = 0; k < mags.size(); ++k) mags[k] = std::abs(spec[k]);
  return mags;
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

}  // namespace asca::dsp
