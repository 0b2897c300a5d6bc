#pragma once

#include <cstdint>
#include <vector>

namespace asca {

struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = 44100;

  // Throws std::invalid_argument on empty samples, non-positive rate, or
  // non-finite amplitudes.
  void validate() const;
};

struct NoiseSpec {
  double eta = 0.0;  // multiplier on unit-variance Gaussian noise
  std::uint64_t seed = 0;
};

struct SegmentationConfig {
  std::size_t expected_segments = 25;
  std::size_t energy_window = 1024;
  std::size_t energy_hop = 256;
  double min_separation_s = 0.1;
  std::size_t clip_length = 0;  // samples per extracted keystroke
  // Candidate peaks below this fraction of the envelope maximum are ignored,
  // so a quiet recording fails loudly instead of returning noise frames.
  double peak_threshold = 0.1;

  void validate(int sample_rate_hz) const;
};

// Reference noise-factor presets (Phone / Zoom, Low / Medium / High).
inline constexpr double kPhoneEtaLow = 0.012;
inline constexpr double kPhoneEtaMedium = 0.024;
inline constexpr double kPhoneEtaHigh = 0.06;
inline constexpr double kZoomEtaLow = 0.1;
inline constexpr double kZoomEtaMedium = 0.5;
inline constexpr double kZoomEtaHigh = 1.0;

// s_noisy = s + eta * N(0,1), drawn from Rng(spec.seed). No clipping: the
// noise models the acoustic channel, not the codec.
Waveform add_gaussian_noise(const Waveform& w, const NoiseSpec& spec);

// Translate the waveform by `offset` samples (positive = later); vacated
// positions are zero-filled, length preserved.
Waveform time_shift_by(const Waveform& w, std::int64_t offset);

// Random shift with offset uniform in [-max_fraction*N, +max_fraction*N].
Waveform time_shift(const Waveform& w, double max_fraction, std::uint64_t seed);

// Per-frame sum of DFT magnitudes; output length floor((N - window)/hop) + 1.
std::vector<double> energy_envelope(const Waveform& w, std::size_t window,
                                    std::size_t hop);

// Greedy peak picking on the energy envelope: candidates sorted by descending
// envelope value, accepted unless within min_separation of an earlier accept,
// until expected_segments peaks are found. Clips of clip_length samples are
// centered on each peak (zero-padded at recording edges) and returned in
// temporal order. Throws SegmentationError if too few peaks survive.
std::vector<Waveform> segment_keystrokes(const Waveform& w,
                                         const SegmentationConfig& cfg);

}  // namespace asca
