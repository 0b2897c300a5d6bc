#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "asca/classifier.hpp"
#include "asca/dataset.hpp"

namespace asca {

struct AttackTranscript {
  std::string truth;
  std::string predicted;
  std::optional<std::string> corrected;
  std::string noise_level;  // Low | Medium | High | free-form
  double eta = 0.0;
  std::uint64_t seed = 0;
  std::string path;  // "audio" | "channel"
  std::optional<std::string> error;  // correction failure, recorded per sentence
};

// Full audio path: every non-space character is realized by sampling one of
// that key's clips (with replacement, from the whole dataset), noising at
// eta, featurizing and classifying. Spaces go through the SPACE row of the
// confusion matrix estimated from cm_probe_per_class clips per key at the
// same eta. Per-sentence seeds derive from (seed, sentence index), so results
// are independent of processing order.
std::vector<AttackTranscript> attack_audio(const SentenceCorpus& corpus,
                                           const KeystrokeDataset& ds,
                                           const KeyClassifier& model,
                                           const MelConfig& mel_cfg, double eta,
                                           std::uint64_t seed,
                                           const std::string& noise_level = "",
                                           int cm_probe_per_class = 5);

// Fast statistical path through a calibrated 37x37 channel.
std::vector<AttackTranscript> attack_channel(const SentenceCorpus& corpus,
                                             const ConfusionMatrix& cm,
                                             const std::string& eta_label,
                                             std::uint64_t seed);

void write_transcripts_jsonl(const std::filesystem::path& path,
                             const std::vector<AttackTranscript>& transcripts);
std::vector<AttackTranscript> read_transcripts_jsonl(const std::filesystem::path& path);

}  // namespace asca
