#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "asca/calibration.hpp"
#include "asca/classifier.hpp"
#include "asca/correction.hpp"
#include "asca/profiles.hpp"

namespace asca {

// Configuration validation failure; carries every violation found.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string msg, std::vector<std::string> problems)
      : std::runtime_error(std::move(msg)), violations(std::move(problems)) {}
  std::vector<std::string> violations;
};

struct RunConfig {
  std::string profile = "synthetic";  // phone | zoom | synthetic | *_direct
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";

  // Inputs; which ones are required depends on the subcommand.
  std::filesystem::path recordings_dir;
  std::filesystem::path manifest;  // dataset manifest produced by `segment`
  std::filesystem::path corpus_path;
  std::filesystem::path wordlist_path;

  int corpus_digit = 500;
  int corpus_plain = 500;
  double test_fraction = 0.2;

  MelConfig mel;  // profile default unless overridden in config
  double timeshift_fraction = 0.0;
  MaskSpec mask;
  double train_noise_eta = 0.0;

  // Ordered Low -> Medium -> High.
  std::vector<std::pair<std::string, double>> noise_presets;

  std::string backend_kind = "oracle";  // oracle | echo | dictionary | remote
  RemoteConfig remote;
  int fewshot_k = 2;
  std::string score_target = "corrected";  // corrected | predicted

  CalibrationOptions calibration;
  EtaBounds eta_bounds{1e-4, 2.0};
  int probe_sentences = 20;
  std::vector<double> calibration_targets{0.95, 0.85, 0.70};
};

namespace pipeline {

RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& cfg);

// FNV-1a over the canonical JSON form; names run artifacts.
std::string config_hash(const RunConfig& cfg);

// Writes out_dir/manifest.json capturing config hash, seed, and the artifact
// paths produced so far.
void write_run_manifest(const RunConfig& cfg,
                        const std::map<std::string, std::string>& artifacts);

// Subcommand bodies (the CLI is a thin wrapper). Each returns the paths of
// the artifacts it wrote.
std::map<std::string, std::string> cmd_segment(const RunConfig& cfg);
std::map<std::string, std::string> cmd_featurize(const RunConfig& cfg);
std::map<std::string, std::string> cmd_train(const RunConfig& cfg);
std::map<std::string, std::string> cmd_evaluate(const RunConfig& cfg, double eta);
std::map<std::string, std::string> cmd_calibrate(const RunConfig& cfg);
std::map<std::string, std::string> cmd_attack(const RunConfig& cfg,
                                              const std::string& preset);
std::map<std::string, std::string> cmd_correct(const RunConfig& cfg,
                                               const std::filesystem::path& transcripts);
std::map<std::string, std::string> cmd_score(const RunConfig& cfg,
                                             const std::filesystem::path& transcripts,
                                             const std::string& backend_name);
std::map<std::string, std::string> cmd_report(const RunConfig& cfg,
                                              const std::vector<std::filesystem::path>& reports);

// Full synthetic-profile pipeline: dataset -> train -> attack at every noise
// preset -> correct with the configured backend -> score -> report table.
// Deterministic: identical config yields byte-identical reports.
std::map<std::string, std::string> run_full(const RunConfig& cfg);

// Loads the dataset named by the config (synthetic profile generates it).
KeystrokeDataset load_or_synthesize_dataset(const RunConfig& cfg);

std::unique_ptr<CorrectorBackend> make_backend(const RunConfig& cfg);

}  // namespace pipeline
}  // namespace asca
