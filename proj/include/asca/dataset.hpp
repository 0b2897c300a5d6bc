#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "asca/signal.hpp"

namespace asca {

struct KeystrokeItem {
  int label;  // 0..35
  Waveform wave;
};

struct KeystrokeDataset {
  std::vector<KeystrokeItem> items;
  std::string profile;  // phone | zoom | synthetic
  int sample_rate_hz = 0;
};

struct SentenceCorpus {
  std::vector<std::string> sentences;
  int digit_count = 0;
  int plain_count = 0;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Synthetic keystroke fixture: each of the 36 classes is a damped tone burst
// with a class-specific center frequency (strictly increasing across label
// order) plus small per-stroke amplitude/phase/decay jitter and a broadband
// noise floor. Tuned so a nearest-centroid classifier exceeds 0.95 accuracy
// on clean clips.
struct SynthSpec {
  int sample_rate_hz = 8000;
  std::size_t clip_length = 3968;  // synthetic profile mel geometry
  double band_low_hz = 500.0;      // class center frequencies are mel-spaced
  double band_high_hz = 3600.0;    // across [band_low_hz, band_high_hz]
  double amplitude = 0.3;
  double noise_floor = 0.01;
};

KeystrokeDataset synth_dataset(std::uint64_t seed, int strokes_per_key,
                               const SynthSpec& spec = SynthSpec{});

// One <symbol>.wav per key under root; each file is segmented into
// cfg.expected_segments clips labeled by filename. Throws MissingKeyError
// listing absent symbols, or SegmentationError naming the offending key.
KeystrokeDataset load_recordings(const std::filesystem::path& root,
                                 const std::string& profile,
                                 const SegmentationConfig& seg_cfg);

// Lowercase, strip characters outside {a..z, 0..9, space}, collapse runs of
// whitespace, trim. Idempotent.
std::string normalize_sentence(std::string_view line);

SentenceCorpus load_corpus(const std::filesystem::path& path, int n_digit,
                           int n_plain, std::uint64_t seed);

// Same selection logic over in-memory lines; load_corpus is a thin wrapper.
SentenceCorpus select_corpus(const std::vector<std::string>& lines, int n_digit,
                             int n_plain, std::uint64_t seed);

// Per-class shuffle then proportional split; every class keeps at least one
// train item or the call is rejected.
Split stratified_split(const KeystrokeDataset& ds, double test_fraction,
                       std::uint64_t seed);

// Manifest persistence: JSON index (label -> clip paths, profile, rate) plus
// one 32-bit float WAV per clip. A reloaded dataset round-trips label- and
// sample-identically (float32 quantization happens once, at the first save).
void save_dataset(const KeystrokeDataset& ds, const std::filesystem::path& dir);
KeystrokeDataset load_dataset(const std::filesystem::path& manifest_path);

}  // namespace asca
