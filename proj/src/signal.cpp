#include "asca/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "asca/dsp.hpp"
#include "asca/errors.hpp"
#include "asca/rng.hpp"

namespace asca {

void Waveform::validate() const {
  if (samples.empty()) throw std::invalid_argument("waveform: empty samples");
  if (sample_rate_hz <= 0) throw std::invalid_argument("waveform: sample rate must be positive");
  for (double s : samples) {
    if (!std::isfinite(s)) throw std::invalid_argument("waveform: non-finite sample");
  }
}

void SegmentationConfig::validate(int sample_rate_hz) const {
  if (expected_segments == 0) throw std::invalid_argument("segmentation: expected_segments == 0");
  if (energy_window == 0 || energy_hop == 0) {
    throw std::invalid_argument("segmentation: window and hop must be positive");
  }
  if (energy_hop > energy_window) {
    throw std::invalid_argument("segmentation: hop must not exceed window");
  }
  if (min_separation_s <= 0.0 ||
      min_separation_s * sample_rate_hz <= static_cast<double>(energy_hop)) {
    throw std::invalid_argument("segmentation: min_separation too small for hop");
  }
  if (clip_length == 0) throw std::invalid_argument("segmentation: clip_length == 0");
}

Waveform add_gaussian_noise(const Waveform& w, const NoiseSpec& spec) {
  w.validate();
  if (spec.eta < 0.0) throw std::invalid_argument("noise: eta must be non-negative");
  if (spec.eta == 0.0) return w;
  Rng rng(spec.seed);
  Waveform out = w;
  for (double& s : out.samples) s += spec.eta * rng.gaussian();
  return out;
}

Waveform time_shift_by(const Waveform& w, std::int64_t offset) {
  w.validate();
  const auto n = static_cast<std::int64_t>(w.samples.size());
  Waveform out{std::vector<double>(w.samples.size(), 0.0), w.sample_rate_hz};
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t j = i + offset;
    if (j >= 0 && j < n) out.samples[j] = w.samples[i];
  }
  return out;
}

Waveform time_shift(const Waveform& w, double max_fraction, std::uint64_t seed) {
  w.validate();
  if (max_fraction < 0.0 || max_fraction > 1.0) {
    throw std::invalid_argument("time_shift: max_fraction must be in [0, 1]");
  }
  const auto n = static_cast<std::int64_t>(w.samples.size());
  const auto bound = static_cast<std::int64_t>(max_fraction * static_cast<double>(n));
  if (bound == 0) return w;
  Rng rng(seed);
  return time_shift_by(w, rng.uniform_int(-bound, bound));
}

std::vector<double> energy_envelope(const Waveform& w, std::size_t window,
                                    std::size_t hop) {
  w.validate();
  if (hop == 0) throw std::invalid_argument("energy_envelope: hop must be >= 1");
  if (window == 0 || window > w.samples.size()) {
    throw std::invalid_argument("energy_envelope: window must be in [1, N]");
  }
  const std::size_t frames = (w.samples.size() - window) / hop + 1;
  std::vector<double> env(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const auto mags = dsp::magnitude_spectrum(
        std::span<const double>(w.samples.data() + f * hop, window));
    env[f] = std::accumulate(mags.begin(), mags.end(), 0.0);
  }
  return env;
}

std::vector<Waveform> segment_keystrokes(const Waveform& w,
                                         const SegmentationConfig& cfg) {
  w.validate();
  cfg.validate(w.sample_rate_hz);
  const auto env = energy_envelope(w, cfg.energy_window, cfg.energy_hop);
  const double peak_floor =
      cfg.peak_threshold * *std::max_element(env.begin(), env.end());

  std::vector<std::size_t> order(env.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return env[a] > env[b]; });

  const double min_sep_frames =
      cfg.min_separation_s * w.sample_rate_hz / static_cast<double>(cfg.energy_hop);
  std::vector<std::size_t> peaks;
  for (std::size_t idx : order) {
    if (env[idx] <= 0.0 || env[idx] < peak_floor) break;
    const bool clash = std::any_of(peaks.begin(), peaks.end(), [&](std::size_t p) {
      return std::abs(static_cast<double>(idx) - static_cast<double>(p)) < min_sep_frames;
    });
    if (!clash) {
      peaks.push_back(idx);
      if (peaks.size() == cfg.expected_segments) break;
    }
  }
  if (peaks.size() < cfg.expected_segments) {
    throw SegmentationError("segment_keystrokes: found " + std::to_string(peaks.size()) +
                            " peaks, expected " + std::to_string(cfg.expected_segments));
  }
  std::sort(peaks.begin(), peaks.end());

  std::vector<Waveform> clips;
  clips.reserve(peaks.size());
  const auto n = static_cast<std::int64_t>(w.samples.size());
  for (std::size_t p : peaks) {
    const std::int64_t center =
        static_cast<std::int64_t>(p * cfg.energy_hop + cfg.energy_window / 2);
    const std::int64_t start = center - static_cast<std::int64_t>(cfg.clip_length) / 2;
    Waveform clip{std::vector<double>(cfg.clip_length, 0.0), w.sample_rate_hz};
    for (std::size_t i = 0; i < cfg.clip_length; ++i) {
      const std::int64_t j = start + static_cast<std::int64_t>(i);
      if (j >= 0 && j < n) clip.samples[i] = w.samples[j];
    }
    clips.push_back(std::move(clip));
  }
  return clips;
}

}  // namespace asca
