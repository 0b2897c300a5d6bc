#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "asca/dataset.hpp"
#include "asca/spectrogram.hpp"

namespace asca {

// Training-time augmentation chain: waveform noise -> time shift -> mel ->
// time/frequency masking. A zero field disables that stage.
struct AugmentSpec {
  double noise_eta = 0.0;
  double timeshift_fraction = 0.0;
  MaskSpec mask{.max_mask_fraction = 0.0, .masks_per_axis = 0, .seed = 0};
  std::uint64_t seed = 0;
};

using FeatureVector = std::vector<double>;

// Applies the augmentation chain (seeded per item) and flattens the mel image.
FeatureVector featurize(const Waveform& w, const MelConfig& cfg,
                        const AugmentSpec& augment, std::uint64_t item_seed);

// Minimal pluggable classifier surface: anything that maps a mel image to one
// of the 36 key labels can drive the attack and calibration stages.
class KeyClassifier {
 public:
  virtual ~KeyClassifier() = default;
  // Returns (label, score); higher score means more confident.
  virtual std::pair<int, double> predict(const MelSpectrogram& spec) const = 0;
};

struct CentroidModel final : KeyClassifier {
  std::vector<FeatureVector> centroids;  // one per class, label order
  MelConfig mel_config;
  AugmentSpec training_augment;

  // Nearest centroid by Euclidean distance; score is the negative distance.
  // Ties break toward the lexicographically earlier label.
  std::pair<int, double> predict(const MelSpectrogram& spec) const override;
};

CentroidModel train_centroid(const KeystrokeDataset& ds, const Split& split,
                             const MelConfig& mel_cfg, const AugmentSpec& augment);

// Row-stochastic square matrix over true x predicted labels.
struct ConfusionMatrix {
  int n = 0;
  std::vector<double> p;  // row-major n x n

  double& at(int r, int c) { return p[static_cast<std::size_t>(r) * n + c]; }
  double at(int r, int c) const { return p[static_cast<std::size_t>(r) * n + c]; }
  static ConfusionMatrix identity(int n);
  void validate(double tol = 1e-9) const;
};

struct EvalResult {
  double accuracy = 0.0;
  ConfusionMatrix cm36;  // rows normalized by per-class test counts
};

// Classifies every test item after waveform-noise injection; per-item noise
// seeds are derived from noise.seed and the item index.
EvalResult evaluate(const KeyClassifier& model, const KeystrokeDataset& ds,
                    const Split& split, const NoiseSpec& noise,
                    const MelConfig& mel_cfg);

// 37x37 extension under the space assumption: SPACE diagonal = mean of the 36
// class diagonals, remaining SPACE-row mass uniform over non-space labels;
// characters are never misread as SPACE (the classifier has no space class).
ConfusionMatrix extend_with_space(const ConfusionMatrix& cm36);

// Substitution-only channel: each character independently replaced by a draw
// from its confusion row. Length-preserving, deterministic under seed.
std::string simulate_channel(const ConfusionMatrix& cm, std::string_view text,
                             std::uint64_t seed);

// Persistence: one binary matrix file per centroid set plus JSON metadata.
void save_model(const CentroidModel& model, const std::filesystem::path& dir);
CentroidModel load_model(const std::filesystem::path& dir);

}  // namespace asca
