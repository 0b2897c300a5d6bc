#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "asca/alphabet.hpp"
#include "asca/dataset.hpp"
#include "asca/dsp.hpp"
#include "asca/errors.hpp"
#include "asca/wav.hpp"

using namespace asca;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Recording with `n` exponentially decaying clicks at a fixed spacing.
Waveform click_track(int n, int sr, std::size_t spacing, double amp) {
  Waveform w{std::vector<double>(2 * spacing + static_cast<std::size_t>(n) * spacing, 0.0), sr};
  for (int c = 0; c < n; ++c) {
    const std::size_t start = spacing + static_cast<std::size_t>(c) * spacing;
    for (std::size_t i = 0; i < 400 && start + i < w.samples.size(); ++i) {
      w.samples[start + i] =
          amp * std::exp(-static_cast<double>(i) / 60.0) * ((i % 2 == 0) ? 1.0 : -1.0);
    }
  }
  return w;
}

SegmentationConfig small_seg() {
  SegmentationConfig cfg;
  cfg.expected_segments = 25;
  cfg.energy_window = 512;
  cfg.energy_hop = 128;
  cfg.min_separation_s = 0.1;
  cfg.clip_length = 1600;
  return cfg;
}

}  // namespace

TEST_CASE("alphabet maps 36 symbols both ways") {
  CHECK(kNumKeys == 36);
  for (int k = 0; k < kNumKeys; ++k) {
    CHECK(symbol_index(index_symbol(k)) == k);
  }
  CHECK(symbol_index(' ') == kSpaceIndex);
  CHECK(index_symbol(kSpaceIndex) == ' ');
  CHECK_THROWS_AS(symbol_index('!'), AlphabetError);
  CHECK_THROWS_AS(symbol_index('A'), AlphabetError);
  CHECK_THROWS_AS(index_symbol(37), AlphabetError);
  CHECK_THROWS_AS(index_symbol(-1), AlphabetError);
}

TEST_CASE("synth_dataset: size, labels, determinism") {
  const auto ds = synth_dataset(7, 25);
  CHECK(ds.items.size() == 900);
  CHECK(ds.profile == "synthetic");
  CHECK(ds.sample_rate_hz == 8000);
  std::map<int, int> per_class;
  for (const auto& item : ds.items) {
    CHECK(item.label >= 0);
    CHECK(item.label < 36);
    CHECK(item.wave.samples.size() == 3968);
    CHECK_NOTHROW(item.wave.validate());
    per_class[item.label]++;
  }
  CHECK(per_class.size() == 36);
  for (const auto& [label, n] : per_class) CHECK(n == 25);

  const auto again = synth_dataset(7, 25);
  REQUIRE(again.items.size() == ds.items.size());
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    CHECK(again.items[i].label == ds.items[i].label);
    CHECK(again.items[i].wave.samples == ds.items[i].wave.samples);
  }

  const auto other_seed = synth_dataset(8, 25);
  CHECK(other_seed.items[0].wave.samples != ds.items[0].wave.samples);

  CHECK_THROWS_AS(synth_dataset(7, 1), std::invalid_argument);
}

TEST_CASE("synth_dataset: class center frequencies increase with label") {
  // Estimate the dominant frequency of each class from the DFT argmax over
  // the early (high-amplitude) part of the first clip.
  const auto ds = synth_dataset(3, 2);
  std::vector<double> rate(36, 0.0);
  for (int k = 0; k < 36; ++k) {
    const auto& s = ds.items[static_cast<std::size_t>(k) * 2].wave.samples;
    const auto spectrum = dsp::dft({s.begin(), s.begin() + 1024});
    std::size_t argmax = 0;
    for (std::size_t b = 1; b <= 512; ++b) {
      if (std::abs(spectrum[b]) > std::abs(spectrum[argmax])) argmax = b;
    }
    rate[static_cast<std::size_t>(k)] = static_cast<double>(argmax);
  }
  for (int k = 1; k < 36; ++k) {
    CHECK(rate[static_cast<std::size_t>(k)] > rate[static_cast<std::size_t>(k - 1)]);
  }
}

TEST_CASE("load_recordings: 36 files segment into 900 labeled clips") {
  const auto dir = fresh_dir("asca_rec_ok");
  const auto cfg = small_seg();
  for (int k = 0; k < kNumKeys; ++k) {
    write_wav_f32(dir / (std::string(1, index_symbol(k)) + ".wav"),
                  click_track(25, 8000, 1600, 0.6));
  }
  const auto ds = load_recordings(dir, "synthetic", cfg);
  CHECK(ds.items.size() == 900);
  CHECK(ds.sample_rate_hz == 8000);
  std::map<int, int> per_class;
  for (const auto& item : ds.items) {
    CHECK(item.wave.samples.size() == cfg.clip_length);
    per_class[item.label]++;
  }
  for (int k = 0; k < 36; ++k) CHECK(per_class[k] == 25);
}

TEST_CASE("load_recordings: empty directory reports every missing key") {
  const auto dir = fresh_dir("asca_rec_empty");
  try {
    load_recordings(dir, "synthetic", small_seg());
    FAIL("expected MissingKeyError");
  } catch (const MissingKeyError& e) {
    const std::string msg = e.what();
    for (int k = 0; k < kNumKeys; ++k) {
      CHECK(msg.find(index_symbol(k)) != std::string::npos);
    }
  }
}

TEST_CASE("load_recordings: an under-populated file names the offending key") {
  const auto dir = fresh_dir("asca_rec_short");
  for (int k = 0; k < kNumKeys; ++k) {
    write_wav_f32(dir / (std::string(1, index_symbol(k)) + ".wav"),
                  click_track(25, 8000, 1600, 0.6));
  }
  write_wav_f32(dir / "7.wav", click_track(3, 8000, 1600, 0.6));
  try {
    load_recordings(dir, "synthetic", small_seg());
    FAIL("expected SegmentationError");
  } catch (const SegmentationError& e) {
    CHECK(std::string(e.what()).find("'7'") != std::string::npos);
  }
}

TEST_CASE("normalize_sentence") {
  CHECK(normalize_sentence("Hello, World!") == "hello world");
  CHECK(normalize_sentence("  A  B\t C \n") == "a b c");
  CHECK(normalize_sentence("pin 1234.") == "pin 1234");
  CHECK(normalize_sentence("don't") == "dont");
  CHECK(normalize_sentence("...") == "");
  CHECK(normalize_sentence("") == "");
  // Idempotence over a varied sample.
  for (const char* s : {"Mixed CASE 42", "  spaces   everywhere  ", "a-b-c", "1+1=2"}) {
    const auto once = normalize_sentence(s);
    CHECK(normalize_sentence(once) == once);
  }
}

TEST_CASE("select_corpus: strata counts, determinism, error paths") {
  std::vector<std::string> lines;
  for (int i = 0; i < 40; ++i) {
    lines.push_back("plain sentence variant " + std::string(1, static_cast<char>('a' + i % 26)) +
                    std::string(1, static_cast<char>('a' + i / 26)));
  }
  for (int i = 0; i < 30; ++i) lines.push_back("code is " + std::to_string(1000 + i));
  lines.push_back("   ");
  lines.push_back("!!!");

  const auto c = select_corpus(lines, 10, 20, 5);
  CHECK(c.digit_count == 10);
  CHECK(c.plain_count == 20);
  REQUIRE(c.sentences.size() == 30);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(std::any_of(c.sentences[i].begin(), c.sentences[i].end(),
                      [](char ch) { return ch >= '0' && ch <= '9'; }));
  }
  for (std::size_t i = 10; i < 30; ++i) {
    CHECK(std::none_of(c.sentences[i].begin(), c.sentences[i].end(),
                       [](char ch) { return ch >= '0' && ch <= '9'; }));
  }
  std::set<std::string> unique(c.sentences.begin(), c.sentences.end());
  CHECK(unique.size() == 30);
  for (const auto& s : c.sentences) CHECK(normalize_sentence(s) == s);

  const auto again = select_corpus(lines, 10, 20, 5);
  CHECK(again.sentences == c.sentences);
  const auto reseeded = select_corpus(lines, 10, 20, 6);
  CHECK(reseeded.sentences != c.sentences);

  CHECK_THROWS_AS(select_corpus(lines, 31, 0, 5), InsufficientCorpusError);
  CHECK_THROWS_AS(select_corpus(lines, 0, 41, 5), InsufficientCorpusError);
  CHECK_NOTHROW(select_corpus(lines, 0, 0, 5));
  CHECK_THROWS_AS(select_corpus(lines, -1, 0, 5), std::invalid_argument);
}

TEST_CASE("load_corpus reads a file and matches in-memory selection") {
  const auto dir = fresh_dir("asca_corpus");
  std::vector<std::string> lines = {"The cat sat.", "Dogs bark 42 times!", "plain words here",
                                    "room 101 is locked", "more plain text okay"};
  {
    std::ofstream f(dir / "corpus.txt");
    for (const auto& l : lines) f << l << "\n";
  }
  const auto from_file = load_corpus(dir / "corpus.txt", 2, 3, 9);
  const auto from_mem = select_corpus(lines, 2, 3, 9);
  CHECK(from_file.sentences == from_mem.sentences);
  CHECK_THROWS_AS(load_corpus(dir / "missing.txt", 1, 1, 9), std::runtime_error);
}

TEST_CASE("stratified_split: per-class proportions and partition") {
  const auto ds = synth_dataset(11, 25);
  const auto split = stratified_split(ds, 0.2, 4);
  CHECK(split.train.size() == 720);
  CHECK(split.test.size() == 180);

  std::map<int, int> test_per_class, train_per_class;
  for (auto i : split.test) test_per_class[ds.items[i].label]++;
  for (auto i : split.train) train_per_class[ds.items[i].label]++;
  for (int k = 0; k < 36; ++k) {
    CHECK(test_per_class[k] == 5);
    CHECK(train_per_class[k] == 20);
  }

  std::set<std::size_t> all(split.train.begin(), split.train.end());
  all.insert(split.test.begin(), split.test.end());
  CHECK(all.size() == 900);
  CHECK(*all.rbegin() == 899);

  const auto again = stratified_split(ds, 0.2, 4);
  CHECK(again.train == split.train);
  CHECK(again.test == split.test);
  const auto reseeded = stratified_split(ds, 0.2, 5);
  CHECK(reseeded.test != split.test);
}

TEST_CASE("stratified_split: rejects fractions that empty a train class") {
  const auto ds = synth_dataset(11, 2);
  CHECK_THROWS_AS(stratified_split(ds, 0.9, 4), std::invalid_argument);
  CHECK_THROWS_AS(stratified_split(ds, 0.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(stratified_split(ds, 1.0, 4), std::invalid_argument);
}

TEST_CASE("dataset save/load round trip") {
  const auto dir = fresh_dir("asca_ds_rt");
  auto ds = synth_dataset(13, 3);
  save_dataset(ds, dir);
  CHECK(fs::exists(dir / "manifest.json"));
  const auto back = load_dataset(dir / "manifest.json");
  CHECK(back.profile == ds.profile);
  CHECK(back.sample_rate_hz == ds.sample_rate_hz);
  REQUIRE(back.items.size() == ds.items.size());
  // Clips are stored as float32, so reloading matches the quantized original.
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    CHECK(back.items[i].label == ds.items[i].label);
    REQUIRE(back.items[i].wave.samples.size() == ds.items[i].wave.samples.size());
    for (std::size_t j = 0; j < ds.items[i].wave.samples.size(); ++j) {
      CHECK(back.items[i].wave.samples[j] ==
            doctest::Approx(ds.items[i].wave.samples[j]).epsilon(1e-6));
    }
  }
  // Save/load of an already float32-quantized dataset is exact.
  const auto dir2 = fresh_dir("asca_ds_rt2");
  save_dataset(back, dir2);
  const auto twice = load_dataset(dir2 / "manifest.json");
  for (std::size_t i = 0; i < back.items.size(); ++i) {
    CHECK(twice.items[i].wave.samples == back.items[i].wave.samples);
  }
}
