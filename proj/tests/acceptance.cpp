// Acceptance harness: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Each check is built on an oracle independent of the code
// under test wherever the criterion allows one.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asca/alphabet.hpp"
#include "asca/attack.hpp"
#include "asca/calibration.hpp"
#include "asca/correction.hpp"
#include "asca/dataset.hpp"
#include "asca/errors.hpp"
#include "asca/lora.hpp"
#include "asca/metrics.hpp"
#include "asca/pipeline.hpp"
#include "asca/profiles.hpp"
#include "asca/rng.hpp"
#include "asca/signal.hpp"
#include "asca/spectrogram.hpp"
#include "asca/wav.hpp"

using namespace asca;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s: criterion %d (%s)%s%s\n", ok ? "PASS" : "FAIL", criterion, name.c_str(),
              detail.empty() ? "" : " - ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

// Deterministic sentence corpus without touching the filesystem.
SentenceCorpus generated_corpus(int n, std::uint64_t seed) {
  static const std::vector<std::string> words = {
      "the",  "cat",  "dog",   "bird", "house", "river", "stone", "light",
      "dark", "fast", "slow",  "old",  "new",   "red",   "blue",  "green",
      "runs", "sits", "jumps", "falls", "sees", "finds", "keeps", "loses"};
  SentenceCorpus corpus;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    std::string s;
    const int len = static_cast<int>(rng.uniform_int(4, 7));
    for (int w = 0; w < len; ++w) {
      if (!s.empty()) s.push_back(' ');
      s += words[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(words.size()) - 1))];
    }
    if (i % 2 == 0) {
      s += " " + std::to_string(rng.uniform_int(10, 9999));
      ++corpus.digit_count;
    } else {
      ++corpus.plain_count;
    }
    corpus.sentences.push_back(std::move(s));
  }
  return corpus;
}

// Exponential-time LCS oracle by subsequence enumeration over the shorter
// string. Only usable for short inputs, which is the point: it shares no
// machinery with the implementation.
std::size_t lcs_by_enumeration(const std::string& a, const std::string& b) {
  const std::string& s = a.size() <= b.size() ? a : b;
  const std::string& t = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  for (std::size_t mask = 0; mask < (1u << s.size()); ++mask) {
    std::string sub;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (mask & (1u << i)) sub.push_back(s[i]);
    }
    if (sub.size() <= best) continue;
    std::size_t j = 0;
    for (char c : t) {
      if (j < sub.size() && c == sub[j]) ++j;
    }
    if (j == sub.size()) best = sub.size();
  }
  return best;
}

// Row-reduction rank with partial pivoting; independent of any linear algebra
// in the library.
int elimination_rank(std::vector<std::vector<double>> m, double tol = 1e-9) {
  const std::size_t rows = m.size();
  if (rows == 0) return 0;
  const std::size_t cols = m[0].size();
  int rank = 0;
  std::size_t row = 0;
  for (std::size_t col = 0; col < cols && row < rows; ++col) {
    std::size_t pivot = row;
    for (std::size_t r = row + 1; r < rows; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (std::abs(m[pivot][col]) < tol) continue;
    std::swap(m[row], m[pivot]);
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == row) continue;
      const double f = m[r][col] / m[row][col];
      for (std::size_t c = col; c < cols; ++c) m[r][c] -= f * m[row][c];
    }
    ++rank;
    ++row;
  }
  return rank;
}

std::string random_text(Rng& rng, int max_len) {
  std::string s;
  const int len = static_cast<int>(rng.uniform_int(0, max_len));
  for (int i = 0; i < len; ++i) {
    s.push_back(static_cast<char>('a' + rng.uniform_int(0, 4)));
  }
  return s;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

struct TrainedFixture {
  KeystrokeDataset ds;
  Split split;
  CentroidModel model;
};

TrainedFixture make_fixture() {
  TrainedFixture f;
  f.ds = synth_dataset(42, 25);
  f.split = stratified_split(f.ds, 0.2, 3);
  f.model = train_centroid(f.ds, f.split, synthetic_profile().mel, AugmentSpec{});
  return f;
}

double mean_accuracy(const std::vector<AttackTranscript>& ts) {
  double acc = 0.0;
  for (const auto& t : ts) acc += char_accuracy(t.truth, t.predicted);
  return acc / static_cast<double>(ts.size());
}

void criterion_1_char_accuracy() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(1001);
  bool ok = true;
  std::string detail;
  for (int i = 0; i < 10000 && ok; ++i) {
    const auto a = random_text(rng, 10);
    const auto b = random_text(rng, 10);
    const double got = char_accuracy(a, b);
    double want = 1.0;
    if (!a.empty() || !b.empty()) {
      want = 2.0 * static_cast<double>(lcs_by_enumeration(a, b)) /
             static_cast<double>(a.size() + b.size());
    }
    if (std::abs(got - want) > 1e-12 || got != char_accuracy(b, a)) {
      ok = false;
      detail = "mismatch on '" + a + "' vs '" + b + "'";
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (ok && secs >= 10.0) {
    ok = false;
    detail = "took " + std::to_string(secs) + "s";
  }
  if (ok) {
    std::ostringstream d;
    d << "10000 random pairs against the enumeration oracle in " << std::fixed << secs << "s";
    detail = d.str();
  }
  report(1, "char accuracy vs independent oracle", ok, detail);
}

void criterion_2_calibration(const TrainedFixture& f) {
  const auto start = std::chrono::steady_clock::now();
  const auto probe = generated_corpus(20, 501);
  const auto validation = generated_corpus(200, 502);
  const MeasureFn measure = [&](double eta, std::uint64_t seed) {
    return measure_accuracy_audio(eta, probe, f.ds, f.model, f.model.mel_config, seed);
  };
  CalibrationOptions opts;
  opts.tolerance = 0.02;
  opts.samples_per_probe = 8;
  opts.max_iterations = 30;
  opts.seed = 17;

  bool ok = true;
  std::ostringstream detail;
  for (double target : {0.95, 0.85, 0.70}) {
    try {
      const auto result = calibrate_eta(target, {1e-4, 0.2}, measure, opts);
      const double validated = mean_accuracy(attack_audio(
          validation, f.ds, f.model, f.model.mel_config, result.eta, 909));
      detail << "target " << target << ": eta " << result.eta << ", validated " << validated
             << "; ";
      if (!result.converged || std::abs(validated - target) > 0.02) ok = false;
    } catch (const std::exception& e) {
      ok = false;
      detail << "target " << target << ": " << e.what() << "; ";
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  detail << std::fixed << secs << "s";
  if (secs >= 300.0) ok = false;
  report(2, "noise calibration hits 0.95/0.85/0.70 within 0.02", ok, detail.str());
}

void criterion_3_correction_trend(const TrainedFixture& f) {
  const auto corpus = generated_corpus(120, 503);
  bool ok = true;
  std::ostringstream detail;

  // Uncorrected degradation must be strictly monotone across the presets for
  // every metric.
  std::vector<MetricReport> uncorrected;
  std::vector<std::vector<AttackTranscript>> per_level;
  const std::vector<std::pair<std::string, double>> presets = {
      {"Low", 0.016}, {"Medium", 0.031}, {"High", 0.047}};
  for (std::size_t i = 0; i < presets.size(); ++i) {
    auto ts = attack_audio(corpus, f.ds, f.model, f.model.mel_config, presets[i].second,
                           601 + i, presets[i].first);
    uncorrected.push_back(score_transcripts(ts, ScoreTarget::predicted, "uncorrected"));
    per_level.push_back(std::move(ts));
  }
  for (const auto& name : kMetricNames) {
    const double low = uncorrected[0].mean.at(name);
    const double medium = uncorrected[1].mean.at(name);
    const double high = uncorrected[2].mean.at(name);
    if (!(low > medium && medium > high)) {
      ok = false;
      detail << name << " not monotone (" << low << ", " << medium << ", " << high << "); ";
    }
  }

  // Oracle correction restores the truth exactly.
  auto oracle_ts = per_level[2];
  auto oracle = make_oracle_backend();
  correct_transcripts(*oracle, oracle_ts, oracle_ts, 2, 701);
  const auto oracle_report = score_transcripts(oracle_ts, ScoreTarget::corrected, "oracle");
  if (oracle_report.mean.at("accuracy") < 0.9999) {
    ok = false;
    detail << "oracle accuracy " << oracle_report.mean.at("accuracy") << "; ";
  }

  // A plain dictionary backend must already lift BLEU at the Low preset.
  std::vector<std::string> vocab;
  for (const auto& s : corpus.sentences) {
    for (const auto& t : tokenize(s)) vocab.push_back(t);
  }
  auto dict_ts = per_level[0];
  auto dict = make_dictionary_backend(vocab);
  correct_transcripts(*dict, dict_ts, dict_ts, 0, 702);
  const auto dict_report = score_transcripts(dict_ts, ScoreTarget::corrected, "dictionary");
  const double bleu_before = uncorrected[0].mean.at("bleu");
  const double bleu_after = dict_report.mean.at("bleu");
  if (!(bleu_after > bleu_before)) {
    ok = false;
    detail << "dictionary bleu " << bleu_before << " -> " << bleu_after << " (no lift); ";
  } else {
    detail << "dictionary bleu at Low " << bleu_before << " -> " << bleu_after;
  }
  report(3, "correction lifts degraded transcripts", ok, detail.str());
}

void criterion_4_segmentation() {
  bool ok = true;
  std::string detail;
  // 25 synthetic clicks in one recording.
  const int sr = 8000;
  Waveform rec{std::vector<double>(70000, 0.0), sr};
  for (int c = 0; c < 25; ++c) {
    const std::size_t start = 2000 + static_cast<std::size_t>(c) * 2500;
    for (std::size_t i = 0; i < 300; ++i) {
      rec.samples[start + i] =
          0.5 * std::exp(-static_cast<double>(i) / 50.0) * ((i % 2 == 0) ? 1.0 : -1.0);
    }
  }
  SegmentationConfig seg;
  seg.expected_segments = 25;
  seg.energy_window = 512;
  seg.energy_hop = 128;
  seg.min_separation_s = 0.1;
  seg.clip_length = 1600;
  try {
    const auto clips = segment_keystrokes(rec, seg);
    if (clips.size() != 25) {
      ok = false;
      detail = "got " + std::to_string(clips.size()) + " clips";
    }
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }

  // A 36-key directory becomes a 900-item dataset.
  if (ok) {
    const auto dir = fs::temp_directory_path() / "asca_accept_seg";
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (int k = 0; k < kNumKeys; ++k) {
      Waveform file{std::vector<double>(70000, 0.0), sr};
      for (int c = 0; c < 25; ++c) {
        const std::size_t start = 2000 + static_cast<std::size_t>(c) * 2500;
        for (std::size_t i = 0; i < 300; ++i) {
          file.samples[start + i] = 0.5 * std::exp(-static_cast<double>(i) / 50.0) *
                                    std::sin(0.3 * static_cast<double>(i) * (k + 1));
        }
      }
      write_wav_f32(dir / (std::string(1, index_symbol(k)) + ".wav"), file);
    }
    try {
      const auto ds = load_recordings(dir, "synthetic", seg);
      if (ds.items.size() != 900) {
        ok = false;
        detail = "directory gave " + std::to_string(ds.items.size()) + " items";
      } else {
        detail = "25 clips from one recording, 900 items from 36 files";
      }
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
  }
  report(4, "segmentation recovers every keystroke", ok, detail);
}

void criterion_5_geometry() {
  bool ok = true;
  std::string detail = "100 random lengths per profile";
  Rng rng(505);
  const auto phone = phone_profile().mel;
  const auto direct = phone_direct_profile().mel;
  for (int trial = 0; trial < 100 && ok; ++trial) {
    for (const auto* cfg : {&phone, &direct}) {
      const auto n = static_cast<std::size_t>(
          rng.uniform_int(cfg->hop_length, 2 * cfg->clip_length()));
      Waveform w{std::vector<double>(n), cfg->sample_rate_hz};
      for (double& v : w.samples) v = rng.uniform(-0.5, 0.5);
      const auto img = mel_spectrogram(w, *cfg);
      if (img.rows() != cfg->n_mels || img.cols() != cfg->target_width) {
        ok = false;
        detail = "profile " + std::to_string(cfg->n_mels) + " mels gave " +
                 std::to_string(img.rows()) + "x" + std::to_string(img.cols()) +
                 " for length " + std::to_string(n);
      }
    }
  }
  if (ok && (phone.n_mels != 64 || phone.target_width != 64 || direct.n_mels != 224 ||
             direct.target_width != 224)) {
    ok = false;
    detail = "published profile geometry is not 64x64 / 224x224";
  }
  report(5, "spectrogram geometry is 64x64 and 224x224", ok, detail);
}

void criterion_6_lora() {
  bool ok = true;
  std::ostringstream detail;

  FrozenLinear base;
  base.weight = Matrix(10, 14);
  base.bias.assign(10, 0.0);
  Rng rng(606);
  for (double& w : base.weight.v) w = 0.3 * rng.gaussian();

  // (a) zero initial delta.
  const auto ad0 = init_adapter(10, 14, 3, 1);
  const auto merged0 = merge(base, ad0);
  if (merged0.v != base.weight.v) {
    ok = false;
    detail << "initial delta nonzero; ";
  }

  // (b) frozen base is bit-identical through training, and (c) the loss on a
  // separable task drops by at least 90 percent.
  std::vector<TrainExample> batch;
  for (int i = 0; i < 80; ++i) {
    TrainExample ex;
    ex.x.resize(14);
    for (double& v : ex.x) v = rng.uniform(-0.2, 0.2);
    ex.label = static_cast<int>(rng.uniform_int(0, 9));
    ex.x[static_cast<std::size_t>(ex.label)] += 2.0;
    batch.push_back(std::move(ex));
  }
  const auto weight_before = base.weight.v;
  TrainOptions opts;
  opts.learning_rate = 0.02;
  TrainResult result;
  try {
    result = train_lora(base, 3, {{"Low", batch, 100}}, opts);
  } catch (const std::exception& e) {
    ok = false;
    detail << "training failed: " << e.what() << "; ";
  }
  if (base.weight.v != weight_before) {
    ok = false;
    detail << "frozen base changed; ";
  }
  if (ok && result.final_loss > 0.1 * result.initial_loss) {
    ok = false;
    detail << "loss " << result.initial_loss << " -> " << result.final_loss
           << " (< 90% reduction); ";
  }

  // (d) rank of the merged delta never exceeds the adapter rank, checked by
  // row reduction.
  if (ok) {
    const auto merged = merge(base, result.adapter);
    std::vector<std::vector<double>> delta(10, std::vector<double>(14, 0.0));
    for (std::size_t r = 0; r < 10; ++r) {
      for (std::size_t c = 0; c < 14; ++c) {
        delta[r][c] = merged.at(r, c) - base.weight.at(r, c);
      }
    }
    const int rank = elimination_rank(delta);
    if (rank > 3 || rank < 1) {
      ok = false;
      detail << "delta rank " << rank << " with adapter rank 3; ";
    } else {
      detail << "loss " << result.initial_loss << " -> " << result.final_loss
             << ", delta rank " << rank << " <= 3";
    }
  }
  report(6, "low-rank adapter invariants", ok, detail.str());
}

void criterion_7_channel(const TrainedFixture& f) {
  bool ok = true;
  std::ostringstream detail;

  // Empirical marginals of a 1e5-character simulation match the channel row.
  ConfusionMatrix cm = ConfusionMatrix::identity(36);
  const int a = symbol_index('a');
  cm.at(a, a) = 0.6;
  cm.at(a, symbol_index('b')) = 0.3;
  cm.at(a, symbol_index('c')) = 0.1;
  const auto ext = extend_with_space(cm);
  const std::string text(100000, 'a');
  const auto out = simulate_channel(ext, text, 707);
  double na = 0, nb = 0, nc = 0;
  for (char ch : out) {
    na += ch == 'a';
    nb += ch == 'b';
    nc += ch == 'c';
  }
  if (std::abs(na / 1e5 - 0.6) > 0.01 || std::abs(nb / 1e5 - 0.3) > 0.01 ||
      std::abs(nc / 1e5 - 0.1) > 0.01 || na + nb + nc != 1e5) {
    ok = false;
    detail << "marginals " << na / 1e5 << "/" << nb / 1e5 << "/" << nc / 1e5 << "; ";
  }

  // The statistical channel agrees with the full audio path at the same
  // operating point.
  const auto corpus = generated_corpus(200, 504);
  const double eta = 0.031;
  const auto audio_ts =
      attack_audio(corpus, f.ds, f.model, f.model.mel_config, eta, 808, "Medium");
  const auto eval =
      evaluate(f.model, f.ds, f.split, {eta, 809}, f.model.mel_config);
  const auto channel_ts =
      attack_channel(corpus, extend_with_space(eval.cm36), "Medium", 810);
  const double audio_acc = mean_accuracy(audio_ts);
  const double channel_acc = mean_accuracy(channel_ts);
  detail << "audio " << audio_acc << " vs channel " << channel_acc;
  if (std::abs(audio_acc - channel_acc) > 0.03) {
    ok = false;
    detail << " (gap > 0.03)";
  }
  report(7, "confusion channel is faithful", ok, detail.str());
}

void criterion_8_prompt() {
  const std::vector<FewShotExample> shots = {
      {"fhe cat sat", "the cat sat"},
      {"dogs bork 42", "dogs bark 42"},
  };
  const auto messages = build_fewshot_prompt(shots, "a noizy sentence");
  const std::string expected_user =
      "Here are pairs of sentences with typos; learn from them:\n"
      "\n"
      "sentence: fhe cat sat\n"
      "corrected: the cat sat\n"
      "\n"
      "sentence: dogs bork 42\n"
      "corrected: dogs bark 42\n"
      "\n"
      "Now, please correct these sentences and output only the corrected version "
      "with no additional text: a noizy sentence";
  bool ok = messages.size() == 2 && messages[0].role == "system" &&
            messages[0].content == "You are an expert in correcting typos in sentences." &&
            messages[1].role == "user" && messages[1].content == expected_user;
  const auto zero = build_fewshot_prompt({}, "fix me");
  ok = ok && zero.size() == 2 &&
       zero[1].content ==
           "Now, please correct these sentences and output only the corrected version "
           "with no additional text: fix me";
  report(8, "few-shot prompt is byte-exact", ok, ok ? "two-shot and zero-shot golden" : "");
}

void criterion_9_determinism() {
  bool ok = true;
  std::string detail;
  const auto root = fs::temp_directory_path() / "asca_accept_runs";
  fs::remove_all(root);
  fs::create_directories(root);

  // A small corpus file for the end-to-end run.
  const auto corpus_path = root / "corpus.txt";
  {
    const auto corpus = generated_corpus(40, 909);
    std::ofstream f(corpus_path);
    for (const auto& s : corpus.sentences) f << s << "\n";
  }

  RunConfig cfg;
  cfg.profile = "synthetic";
  cfg.seed = 7;
  cfg.corpus_path = corpus_path;
  cfg.corpus_digit = 10;
  cfg.corpus_plain = 10;
  cfg.mel = synthetic_profile().mel;
  cfg.mask = synthetic_profile().mask;
  cfg.timeshift_fraction = synthetic_profile().timeshift_fraction;
  cfg.noise_presets = {{"Low", 0.016}, {"Medium", 0.031}, {"High", 0.047}};
  cfg.backend_kind = "oracle";

  try {
    auto run_a = cfg;
    run_a.out_dir = root / "run_a";
    const auto artifacts_a = pipeline::run_full(run_a);
    auto run_b = cfg;
    run_b.out_dir = root / "run_b";
    const auto artifacts_b = pipeline::run_full(run_b);

    int compared = 0;
    for (const auto& [name, path_a] : artifacts_a) {
      if (name.rfind("report", 0) != 0 && name.rfind("transcripts", 0) != 0 &&
          name.rfind("corrected", 0) != 0) {
        continue;
      }
      const auto it = artifacts_b.find(name);
      if (it == artifacts_b.end()) {
        ok = false;
        detail = "artifact " + name + " missing from second run";
        break;
      }
      if (read_file(path_a) != read_file(it->second)) {
        ok = false;
        detail = "artifact " + name + " differs between runs";
        break;
      }
      ++compared;
    }
    if (ok) detail = std::to_string(compared) + " artifacts byte-identical across two runs";
    if (compared == 0) {
      ok = false;
      detail = "no artifacts compared";
    }
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(9, "full pipeline is deterministic", ok, detail);
}

}  // namespace

int main() {
  criterion_1_char_accuracy();
  const auto fixture = make_fixture();
  criterion_2_calibration(fixture);
  criterion_3_correction_trend(fixture);
  criterion_4_segmentation();
  criterion_5_geometry();
  criterion_6_lora();
  criterion_7_channel(fixture);
  criterion_8_prompt();
  criterion_9_determinism();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all 9 criteria passed\n");
  return 0;
}
