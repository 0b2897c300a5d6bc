#include "asca/attack.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "asca/alphabet.hpp"
#include "asca/errors.hpp"
#include "asca/rng.hpp"

namespace asca {

using nlohmann::json;

namespace {

// Confusion matrix under noise eta, estimated from up to probe_per_class
// clips per key. Feeds the SPACE row of the extended channel.
ConfusionMatrix estimate_cm(const KeystrokeDataset& ds, const KeyClassifier& model,
                            const MelConfig& mel_cfg, double eta, std::uint64_t seed,
                            int probe_per_class) {
  std::vector<std::vector<std::size_t>> by_class(kNumKeys);
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    by_class[static_cast<std::size_t>(ds.items[i].label)].push_back(i);
  }

  ConfusionMatrix cm;
  cm.n = kNumKeys;
  cm.p.assign(static_cast<std::size_t>(kNumKeys) * kNumKeys, 0.0);
  for (int k = 0; k < kNumKeys; ++k) {
    const auto& pool = by_class[static_cast<std::size_t>(k)];
    if (pool.empty()) {
      throw std::invalid_argument(std::string("attack: no clips for key '") +
                                  index_symbol(k) + "'");
    }
    const int probes = std::min<int>(probe_per_class, static_cast<int>(pool.size()));
    for (int i = 0; i < probes; ++i) {
      const auto& item = ds.items[pool[static_cast<std::size_t>(i)]];
      Waveform x = item.wave;
      if (eta > 0.0) {
        x = add_gaussian_noise(
            x, {eta, Rng::derive(seed, 7777 + static_cast<std::uint64_t>(k) * 100 + i)});
      }
      const auto [pred, score] = model.predict(mel_spectrogram(x, mel_cfg));
      cm.at(k, pred) += 1.0 / probes;
    }
  }
  cm.validate(1e-6);
  return cm;
}

}  // namespace

std::vector<AttackTranscript> attack_audio(const SentenceCorpus& corpus,
                                           const KeystrokeDataset& ds,
                                           const KeyClassifier& model,
                                           const MelConfig& mel_cfg, double eta,
                                           std::uint64_t seed,
                                           const std::string& noise_level,
                                           int cm_probe_per_class) {
  std::vector<std::vector<std::size_t>> by_class(kNumKeys);
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    by_class[static_cast<std::size_t>(ds.items[i].label)].push_back(i);
  }
  const auto space_cm = extend_with_space(
      estimate_cm(ds, model, mel_cfg, eta, seed, cm_probe_per_class));

  std::vector<AttackTranscript> transcripts;
  transcripts.reserve(corpus.sentences.size());
  for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
    const auto& truth = corpus.sentences[si];
    Rng rng(Rng::derive(seed, si));
    std::string predicted;
    predicted.reserve(truth.size());
    for (char ch : truth) {
      const int label = symbol_index(ch);
      if (label == kSpaceIndex) {
        // No space audio exists; sample the SPACE row of the extended matrix.
        const double u = rng.uniform();
        double acc = 0.0;
        int pick = kAlphabetSize - 1;
        for (int c = 0; c < kAlphabetSize; ++c) {
          acc += space_cm.at(kSpaceIndex, c);
          if (u < acc) {
            pick = c;
            break;
          }
        }
        predicted.push_back(index_symbol(pick));
        continue;
      }
      const auto& pool = by_class[static_cast<std::size_t>(label)];
      const auto& item =
          ds.items[pool[static_cast<std::size_t>(rng.uniform_int(
              0, static_cast<std::int64_t>(pool.size()) - 1))]];
      Waveform x = item.wave;
      if (eta > 0.0) x = add_gaussian_noise(x, {eta, rng.next_u64()});
      const auto [pred, score] = model.predict(mel_spectrogram(x, mel_cfg));
      predicted.push_back(index_symbol(pred));
    }
    transcripts.push_back({.truth = truth,
                           .predicted = std::move(predicted),
                           .corrected = std::nullopt,
                           .noise_level = noise_level,
                           .eta = eta,
                           .seed = seed,
                           .path = "audio",
                           .error = std::nullopt});
  }
  return transcripts;
}

std::vector<AttackTranscript> attack_channel(const SentenceCorpus& corpus,
                                             const ConfusionMatrix& cm,
                                             const std::string& eta_label,
                                             std::uint64_t seed) {
  cm.validate();
  if (cm.n != kAlphabetSize) {
    throw std::invalid_argument("attack_channel: expected a 37x37 channel matrix");
  }
  std::vector<AttackTranscript> transcripts;
  transcripts.reserve(corpus.sentences.size());
  for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
    const auto& truth = corpus.sentences[si];
    transcripts.push_back({.truth = truth,
                           .predicted = simulate_channel(cm, truth, Rng::derive(seed, si)),
                           .corrected = std::nullopt,
                           .noise_level = eta_label,
                           .eta = 0.0,
                           .seed = seed,
                           .path = "channel",
                           .error = std::nullopt});
  }
  return transcripts;
}

void write_transcripts_jsonl(const std::filesystem::path& path,
                             const std::vector<AttackTranscript>& transcripts) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_transcripts_jsonl: cannot open " + path.string());
  for (const auto& t : transcripts) {
    json j;
    j["truth"] = t.truth;
    j["predicted"] = t.predicted;
    if (t.corrected) j["corrected"] = *t.corrected;
    j["noise_level"] = t.noise_level;
    j["eta"] = t.eta;
    j["seed"] = t.seed;
    j["path"] = t.path;
    if (t.error) j["error"] = *t.error;
    f << j.dump() << "\n";
  }
}

std::vector<AttackTranscript> read_transcripts_jsonl(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_transcripts_jsonl: cannot open " + path.string());
  std::vector<AttackTranscript> transcripts;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    AttackTranscript t;
    t.truth = j.at("truth").get<std::string>();
    t.predicted = j.at("predicted").get<std::string>();
    if (j.contains("corrected")) t.corrected = j.at("corrected").get<std::string>();
    t.noise_level = j.at("noise_level").get<std::string>();
    t.eta = j.at("eta").get<double>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.path = j.at("path").get<std::string>();
    if (j.contains("error")) t.error = j.at("error").get<std::string>();
    transcripts.push_back(std::move(t));
  }
  return transcripts;
}

}  // namespace asca
