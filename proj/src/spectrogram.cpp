#include "asca/spectrogram.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "asca/dsp.hpp"
#include "asca/rng.hpp"

namespace asca {

namespace {
constexpr double kPowerFloor = 1e-10;
const double kDbFloor = 10.0 * std::log10(kPowerFloor);  // -100 dB
}  // namespace

void MelConfig::validate() const {
  if (n_mels <= 0 || n_fft <= 0 || hop_length <= 0 || sample_rate_hz <= 0 ||
      target_width <= 0) {
    throw std::invalid_argument("mel config: sizes must be positive");
  }
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate_hz / 2.0)) {
    throw std::invalid_argument("mel config: require 0 <= fmin < fmax <= nyquist");
  }
  if (n_fft < n_mels) throw std::invalid_argument("mel config: n_fft < n_mels");
  if (hop_length > n_fft) throw std::invalid_argument("mel config: hop > n_fft");
}

void MaskSpec::validate() const {
  if (max_mask_fraction < 0.0 || max_mask_fraction > 1.0) {
    throw std::invalid_argument("mask spec: max_mask_fraction must be in [0, 1]");
  }
  if (masks_per_axis < 0) throw std::invalid_argument("mask spec: masks_per_axis < 0");
}

double mel_from_hz(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double hz_from_mel(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

// Mel-spaced edge frequencies, n_mels + 2 points from fmin to fmax.
std::vector<double> band_edges_hz(const MelConfig& cfg) {
  const double mlo = mel_from_hz(cfg.fmin);
  const double mhi = mel_from_hz(cfg.fmax);
  std::vector<double> edges(static_cast<std::size_t>(cfg.n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = hz_from_mel(mlo + (mhi - mlo) * static_cast<double>(i) /
                                     static_cast<double>(cfg.n_mels + 1));
  }
  return edges;
}

}  // namespace

double band_center_hz(const MelConfig& cfg, int k) {
  return band_edges_hz(cfg)[static_cast<std::size_t>(k) + 1];
}

std::vector<std::vector<double>> mel_filterbank(const MelConfig& cfg) {
  cfg.validate();
  const auto edges = band_edges_hz(cfg);
  const std::size_t n_bins = static_cast<std::size_t>(cfg.n_fft) / 2 + 1;
  const double bin_hz = static_cast<double>(cfg.sample_rate_hz) / cfg.n_fft;

  std::vector<std::vector<double>> bank(static_cast<std::size_t>(cfg.n_mels),
                                        std::vector<double>(n_bins, 0.0));
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    double total = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b) {
      const double f = b * bin_hz;
      double w = 0.0;
      if (f > lo && f < mid) {
        w = (f - lo) / (mid - lo);
      } else if (f >= mid && f < hi) {
        w = (hi - f) / (hi - mid);
      }
      bank[m][b] = w;
      total += w;
    }
    if (total > 0.0) {
      for (double& w : bank[m]) w /= total;
    }
  }
  return bank;
}

MelSpectrogram mel_spectrogram(const Waveform& w, const MelConfig& cfg) {
  cfg.validate();
  w.validate();
  if (w.sample_rate_hz != cfg.sample_rate_hz) {
    throw std::invalid_argument("mel_spectrogram: sample rate mismatch");
  }
  if (w.samples.size() < static_cast<std::size_t>(cfg.hop_length)) {
    throw std::invalid_argument("mel_spectrogram: waveform shorter than one hop");
  }

  const std::size_t n_fft = static_cast<std::size_t>(cfg.n_fft);
  const std::size_t pad = n_fft / 2;
  std::vector<double> padded(w.samples.size() + 2 * pad, 0.0);
  std::copy(w.samples.begin(), w.samples.end(), padded.begin() + static_cast<long>(pad));

  const std::size_t n_frames = w.samples.size() / cfg.hop_length + 1;
  const auto window = dsp::hann_window(n_fft);
  const auto bank = mel_filterbank(cfg);
  const std::size_t n_bins = n_fft / 2 + 1;

  // Triangular filters touch only a narrow bin range; restrict the filterbank
  // product to each band's support.
  std::vector<std::pair<std::size_t, std::size_t>> support(bank.size());
  for (std::size_t m = 0; m < bank.size(); ++m) {
    std::size_t lo = 0, hi = 0;
    while (lo < n_bins && bank[m][lo] == 0.0) ++lo;
    hi = n_bins;
    while (hi > lo && bank[m][hi - 1] == 0.0) --hi;
    support[m] = {lo, hi};
  }

  // Mel energies in dB, one column per frame.
  std::vector<std::vector<double>> columns;
  columns.reserve(n_frames);
  std::vector<double> frame(n_fft);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t start = f * cfg.hop_length;
    for (std::size_t i = 0; i < n_fft; ++i) {
      const double x = start + i < padded.size() ? padded[start + i] : 0.0;
      frame[i] = x * window[i];
    }
    auto spec = dsp::dft(frame);
    std::vector<double> power(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) power[b] = std::norm(spec[b]);

    std::vector<double> col(static_cast<std::size_t>(cfg.n_mels));
    for (int m = 0; m < cfg.n_mels; ++m) {
      double acc = 0.0;
      const auto [blo, bhi] = support[static_cast<std::size_t>(m)];
      for (std::size_t b = blo; b < bhi; ++b) acc += bank[m][b] * power[b];
      col[m] = 10.0 * std::log10(std::max(acc, kPowerFloor));
    }
    columns.push_back(std::move(col));
  }

  // Crop or pad (with the pre-normalization floor) to target_width.
  MelSpectrogram out;
  out.config = cfg;
  out.values.assign(static_cast<std::size_t>(cfg.n_mels) * cfg.target_width, kDbFloor);
  const int used = std::min<int>(cfg.target_width, static_cast<int>(columns.size()));
  for (int c = 0; c < used; ++c) {
    for (int m = 0; m < cfg.n_mels; ++m) out.at(m, c) = columns[c][m];
  }

  double lo = out.values[0], hi = out.values[0];
  for (double v : out.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi > lo) {
    for (double& v : out.values) v = (v - lo) / (hi - lo);
  } else {
    std::fill(out.values.begin(), out.values.end(), 0.0);  // constant image
  }
  return out;
}

MelSpectrogram mask_augment(const MelSpectrogram& s, const MaskSpec& m) {
  m.validate();
  MelSpectrogram out = s;
  Rng rng(m.seed);
  // Column (time) bands first, then row (frequency) bands; draw order is part
  // of the deterministic contract.
  const auto mask_axis = [&](int axis_len, auto&& apply) {
    const auto max_w = static_cast<std::int64_t>(m.max_mask_fraction * axis_len);
    for (int i = 0; i < m.masks_per_axis; ++i) {
      const std::int64_t width = rng.uniform_int(0, max_w);
      const std::int64_t start = rng.uniform_int(0, axis_len - width);
      apply(static_cast<int>(start), static_cast<int>(width));
    }
  };
  mask_axis(out.cols(), [&](int start, int width) {
    for (int c = start; c < start + width; ++c)
      for (int r = 0; r < out.rows(); ++r) out.at(r, c) = 0.0;
  });
  mask_axis(out.rows(), [&](int start, int width) {
    for (int r = start; r < start + width; ++r)
      for (int c = 0; c < out.cols(); ++c) out.at(r, c) = 0.0;
  });
  return out;
}

void write_matrix(const std::filesystem::path& path, std::size_t rows,
                  std::size_t cols, const std::vector<double>& values) {
  if (values.size() != rows * cols) throw std::invalid_argument("write_matrix: size mismatch");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_matrix: cannot open " + path.string());
  f.write("ASCAMAT1", 8);
  const auto put32 = [&](std::uint32_t x) {
    unsigned char b[4] = {static_cast<unsigned char>(x & 0xff),
                          static_cast<unsigned char>((x >> 8) & 0xff),
                          static_cast<unsigned char>((x >> 16) & 0xff),
                          static_cast<unsigned char>((x >> 24) & 0xff)};
    f.write(reinterpret_cast<const char*>(b), 4);
  };
  put32(static_cast<std::uint32_t>(rows));
  put32(static_cast<std::uint32_t>(cols));
  for (double v : values) {
    const auto x = static_cast<float>(v);
    std::uint32_t u;
    std::memcpy(&u, &x, 4);
    put32(u);
  }
}

std::vector<double> read_matrix(const std::filesystem::path& path,
                                std::size_t& rows, std::size_t& cols) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_matrix: cannot open " + path.string());
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, "ASCAMAT1", 8) != 0) {
    throw std::runtime_error("read_matrix: bad magic in " + path.string());
  }
  const auto get32 = [&]() {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  };
  rows = get32();
  cols = get32();
  std::vector<double> values(rows * cols);
  for (double& v : values) {
    const std::uint32_t u = get32();
    float x;
    std::memcpy(&x, &u, 4);
    v = static_cast<double>(x);
  }
  if (!f) throw std::runtime_error("read_matrix: truncated file " + path.string());
  return values;
}

}  // namespace asca
