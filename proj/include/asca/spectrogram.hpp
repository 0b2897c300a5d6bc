#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "asca/signal.hpp"

namespace asca {

struct MelConfig {
  int n_mels = 64;
  int n_fft = 1024;
  int hop_length = 300;
  int sample_rate_hz = 44100;
  double fmin = 0.0;
  double fmax = 22050.0;
  int target_width = 64;

  void validate() const;

  // Clip length that makes the center-padded STFT yield exactly target_width
  // frames without cropping.
  int clip_length() const { return hop_length * (target_width - 1); }
};

struct MelSpectrogram {
  std::vector<double> values;  // row-major, n_mels x target_width, in [0, 1]
  MelConfig config;

  int rows() const { return config.n_mels; }
  int cols() const { return config.target_width; }
  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols() + c]; }
  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols() + c]; }
};

struct MaskSpec {
  double max_mask_fraction = 0.1;
  int masks_per_axis = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

// mel(f) = 2595 * log10(1 + f/700)
double mel_from_hz(double hz);
double hz_from_mel(double mel);

// Triangular filterbank, n_mels x (n_fft/2 + 1), each filter normalized to
// unit area (weights sum to 1).
std::vector<std::vector<double>> mel_filterbank(const MelConfig& cfg);

// Center frequency (Hz) of mel band k under cfg.
double band_center_hz(const MelConfig& cfg, int k);

// Hann-windowed center-padded STFT -> power spectra -> mel filterbank ->
// 10*log10(max(p, 1e-10)) -> per-image min-max normalization to [0,1], with
// the time axis cropped/padded to exactly target_width columns.
MelSpectrogram mel_spectrogram(const Waveform& w, const MelConfig& cfg);

// SpecAugment-style masking: masks_per_axis contiguous column bands and row
// bands, widths uniform in [0, max_mask_fraction * axis_length], positions
// uniform; masked cells set to 0.
MelSpectrogram mask_augment(const MelSpectrogram& s, const MaskSpec& m);

// Binary matrix interchange: magic "ASCAMAT1", u32 rows, u32 cols, then
// row-major float32, all little-endian.
void write_matrix(const std::filesystem::path& path, std::size_t rows,
                  std::size_t cols, const std::vector<double>& values);
std::vector<double> read_matrix(const std::filesystem::path& path,
                                std::size_t& rows, std::size_t& cols);

// 8-bit grayscale PNG export for inspection; row 0 of the matrix is the top
// image row.
void write_png_gray(const std::filesystem::path& path, const MelSpectrogram& s);

}  // namespace asca
