#include "asca/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "asca/alphabet.hpp"
#include "asca/errors.hpp"
#include "asca/rng.hpp"
#include "asca/spectrogram.hpp"
#include "asca/wav.hpp"

namespace asca {

using nlohmann::json;

KeystrokeDataset synth_dataset(std::uint64_t seed, int strokes_per_key,
                               const SynthSpec& spec) {
  if (strokes_per_key < 2) throw std::invalid_argument("synth_dataset: strokes_per_key >= 2");
  KeystrokeDataset ds;
  ds.profile = "synthetic";
  ds.sample_rate_hz = spec.sample_rate_hz;
  ds.items.reserve(static_cast<std::size_t>(kNumKeys) * strokes_per_key);

  const double mel_lo = mel_from_hz(spec.band_low_hz);
  const double mel_hi = mel_from_hz(spec.band_high_hz);
  for (int k = 0; k < kNumKeys; ++k) {
    // Mel-spaced centers keep adjacent classes separated by roughly the same
    // number of filterbank bands across the whole range.
    const double f0 = hz_from_mel(mel_lo + (mel_hi - mel_lo) * k / (kNumKeys - 1));
    for (int s = 0; s < strokes_per_key; ++s) {
      Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(k) * 10007 + s));
      const double amp = spec.amplitude * (1.0 + 0.1 * rng.gaussian());
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double decay = 15.0 * (1.0 + 0.1 * rng.gaussian());
      const double freq = f0 * (1.0 + 0.002 * rng.gaussian());

      Waveform w{std::vector<double>(spec.clip_length), spec.sample_rate_hz};
      for (std::size_t i = 0; i < spec.clip_length; ++i) {
        const double t = static_cast<double>(i) / spec.sample_rate_hz;
        w.samples[i] = amp * std::exp(-decay * t) *
                           std::sin(2.0 * std::numbers::pi * freq * t + phase) +
                       spec.noise_floor * rng.gaussian();
      }
      ds.items.push_back({k, std::move(w)});
    }
  }
  return ds;
}

KeystrokeDataset load_recordings(const std::filesystem::path& root,
                                 const std::string& profile,
                                 const SegmentationConfig& seg_cfg) {
  std::vector<char> missing;
  for (int k = 0; k < kNumKeys; ++k) {
    if (!std::filesystem::exists(root / (std::string(1, index_symbol(k)) + ".wav"))) {
      missing.push_back(index_symbol(k));
    }
  }
  if (!missing.empty()) {
    throw MissingKeyError("missing recordings under " + root.string() + " for keys: " +
                          std::string(missing.begin(), missing.end()));
  }

  KeystrokeDataset ds;
  ds.profile = profile;
  for (int k = 0; k < kNumKeys; ++k) {
    const char sym = index_symbol(k);
    const auto w = read_wav(root / (std::string(1, sym) + ".wav"));
    if (ds.sample_rate_hz == 0) ds.sample_rate_hz = w.sample_rate_hz;
    if (w.sample_rate_hz != ds.sample_rate_hz) {
      throw std::invalid_argument(std::string("load_recordings: sample-rate mismatch at key '") +
                                  sym + "'");
    }
    try {
      for (auto& clip : segment_keystrokes(w, seg_cfg)) {
        ds.items.push_back({k, std::move(clip)});
      }
    } catch (const SegmentationError& e) {
      throw SegmentationError(std::string("key '") + sym + "': " + e.what());
    }
  }
  return ds;
}

std::string normalize_sentence(std::string_view line) {
  std::string out;
  out.reserve(line.size());
  bool pending_space = false;
  for (char raw : line) {
    char c = raw;
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    const bool keep = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
    if (keep) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      pending_space = true;
    }
    // Other characters (punctuation) are dropped without inserting a space.
  }
  return out;
}

SentenceCorpus select_corpus(const std::vector<std::string>& lines, int n_digit,
                             int n_plain, std::uint64_t seed) {
  if (n_digit < 0 || n_plain < 0) throw std::invalid_argument("select_corpus: negative count");
  std::vector<std::string> digit_pool, plain_pool;
  for (const auto& line : lines) {
    auto s = normalize_sentence(line);
    if (s.empty()) continue;
    const bool has_digit = std::any_of(s.begin(), s.end(),
                                       [](char c) { return c >= '0' && c <= '9'; });
    (has_digit ? digit_pool : plain_pool).push_back(std::move(s));
  }
  if (static_cast<int>(digit_pool.size()) < n_digit) {
    throw InsufficientCorpusError("digit stratum has " + std::to_string(digit_pool.size()) +
                                  " sentences, need " + std::to_string(n_digit));
  }
  if (static_cast<int>(plain_pool.size()) < n_plain) {
    throw InsufficientCorpusError("plain stratum has " + std::to_string(plain_pool.size()) +
                                  " sentences, need " + std::to_string(n_plain));
  }

  const auto sample = [](std::vector<std::string>& pool, int n, std::uint64_t s) {
    Rng rng(s);
    for (std::size_t i = pool.size(); i > 1; --i) {
      std::swap(pool[i - 1], pool[static_cast<std::size_t>(rng.uniform_int(
                    0, static_cast<std::int64_t>(i) - 1))]);
    }
    pool.resize(static_cast<std::size_t>(n));
  };
  sample(digit_pool, n_digit, Rng::derive(seed, 1));
  sample(plain_pool, n_plain, Rng::derive(seed, 2));

  SentenceCorpus corpus;
  corpus.digit_count = n_digit;
  corpus.plain_count = n_plain;
  corpus.sentences = std::move(digit_pool);
  corpus.sentences.insert(corpus.sentences.end(), plain_pool.begin(), plain_pool.end());
  return corpus;
}

SentenceCorpus load_corpus(const std::filesystem::path& path, int n_digit,
                           int n_plain, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_corpus: cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return select_corpus(lines, n_digit, n_plain, seed);
}

Split stratified_split(const KeystrokeDataset& ds, double test_fraction,
                       std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("stratified_split: test_fraction must be in (0, 1)");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    by_class[ds.items[i].label].push_back(i);
  }

  Split split;
  for (auto& [label, indices] : by_class) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(label)));
    for (std::size_t i = indices.size(); i > 1; --i) {
      std::swap(indices[i - 1], indices[static_cast<std::size_t>(rng.uniform_int(
                    0, static_cast<std::int64_t>(i) - 1))]);
    }
    const auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(indices.size())));
    if (n_test >= indices.size()) {
      throw std::invalid_argument("stratified_split: class " +
                                  std::string(1, index_symbol(label)) +
                                  " would have an empty train side");
    }
    split.test.insert(split.test.end(), indices.begin(),
                      indices.begin() + static_cast<long>(n_test));
    split.train.insert(split.train.end(), indices.begin() + static_cast<long>(n_test),
                       indices.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

void save_dataset(const KeystrokeDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "clips");
  json manifest;
  manifest["profile"] = ds.profile;
  manifest["sample_rate_hz"] = ds.sample_rate_hz;
  json items = json::array();
  std::map<int, int> counter;
  for (const auto& item : ds.items) {
    const int n = counter[item.label]++;
    const std::string name = std::string(1, index_symbol(item.label)) + "_" +
                             std::to_string(n) + ".wav";
    write_wav_f32(dir / "clips" / name, item.wave);
    items.push_back({{"label", std::string(1, index_symbol(item.label))},
                     {"path", "clips/" + name}});
  }
  manifest["items"] = std::move(items);
  std::ofstream f(dir / "manifest.json");
  f << manifest.dump(2) << "\n";
}

KeystrokeDataset load_dataset(const std::filesystem::path& manifest_path) {
  std::ifstream f(manifest_path);
  if (!f) throw std::runtime_error("load_dataset: cannot open " + manifest_path.string());
  json manifest = json::parse(f);
  KeystrokeDataset ds;
  ds.profile = manifest.at("profile").get<std::string>();
  ds.sample_rate_hz = manifest.at("sample_rate_hz").get<int>();
  const auto base = manifest_path.parent_path();
  for (const auto& item : manifest.at("items")) {
    const auto label = item.at("label").get<std::string>();
    if (label.size() != 1) throw std::runtime_error("load_dataset: bad label " + label);
    ds.items.push_back({symbol_index(label[0]),
                        read_wav(base / item.at("path").get<std::string>())});
  }
  return ds;
}

}  // namespace asca
