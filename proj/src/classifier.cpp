#include "asca/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "asca/alphabet.hpp"
#include "asca/errors.hpp"
#include "asca/rng.hpp"

namespace asca {

using nlohmann::json;

FeatureVector featurize(const Waveform& w, const MelConfig& cfg,
                        const AugmentSpec& augment, std::uint64_t item_seed) {
  Waveform x = w;
  if (augment.noise_eta > 0.0) {
    x = add_gaussian_noise(x, {augment.noise_eta, Rng::derive(item_seed, 1)});
  }
  if (augment.timeshift_fraction > 0.0) {
    x = time_shift(x, augment.timeshift_fraction, Rng::derive(item_seed, 2));
  }
  auto spec = mel_spectrogram(x, cfg);
  if (augment.mask.masks_per_axis > 0 && augment.mask.max_mask_fraction > 0.0) {
    MaskSpec m = augment.mask;
    m.seed = Rng::derive(item_seed, 3);
    spec = mask_augment(spec, m);
  }
  return std::move(spec.values);
}

std::pair<int, double> CentroidModel::predict(const MelSpectrogram& spec) const {
  if (spec.config.n_mels != mel_config.n_mels ||
      spec.config.target_width != mel_config.target_width) {
    throw std::invalid_argument("predict: spectrogram dimensions do not match model");
  }
  int best = -1;
  double best_d2 = 0.0;
  for (int k = 0; k < static_cast<int>(centroids.size()); ++k) {
    const auto& c = centroids[static_cast<std::size_t>(k)];
    double d2 = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double d = spec.values[i] - c[i];
      d2 += d * d;
    }
    if (best < 0 || d2 < best_d2) {  // strict < keeps the earlier label on ties
      best = k;
      best_d2 = d2;
    }
  }
  return {best, -std::sqrt(best_d2)};
}

CentroidModel train_centroid(const KeystrokeDataset& ds, const Split& split,
                             const MelConfig& mel_cfg, const AugmentSpec& augment) {
  CentroidModel model;
  model.mel_config = mel_cfg;
  model.training_augment = augment;
  const std::size_t dim =
      static_cast<std::size_t>(mel_cfg.n_mels) * mel_cfg.target_width;
  model.centroids.assign(kNumKeys, FeatureVector(dim, 0.0));
  std::vector<int> counts(kNumKeys, 0);

  for (std::size_t idx : split.train) {
    const auto& item = ds.items.at(idx);
    const auto feat = featurize(item.wave, mel_cfg, augment, Rng::derive(augment.seed, idx));
    auto& c = model.centroids[static_cast<std::size_t>(item.label)];
    for (std::size_t i = 0; i < dim; ++i) c[i] += feat[i];
    ++counts[static_cast<std::size_t>(item.label)];
  }
  for (int k = 0; k < kNumKeys; ++k) {
    if (counts[static_cast<std::size_t>(k)] == 0) {
      throw std::invalid_argument(std::string("train_centroid: class '") +
                                  index_symbol(k) + "' has no train items");
    }
    for (double& v : model.centroids[static_cast<std::size_t>(k)]) {
      v /= counts[static_cast<std::size_t>(k)];
    }
  }
  return model;
}

ConfusionMatrix ConfusionMatrix::identity(int n) {
  ConfusionMatrix cm;
  cm.n = n;
  cm.p.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) cm.at(i, i) = 1.0;
  return cm;
}

void ConfusionMatrix::validate(double tol) const {
  if (n <= 0 || p.size() != static_cast<std::size_t>(n) * n) {
    throw std::invalid_argument("confusion matrix: bad dimensions");
  }
  for (int r = 0; r < n; ++r) {
    double sum = 0.0;
    for (int c = 0; c < n; ++c) {
      if (at(r, c) < 0.0) throw std::invalid_argument("confusion matrix: negative entry");
      sum += at(r, c);
    }
    if (std::abs(sum - 1.0) > tol) {
      throw std::invalid_argument("confusion matrix: row " + std::to_string(r) +
                                  " sums to " + std::to_string(sum));
    }
  }
}

EvalResult evaluate(const KeyClassifier& model, const KeystrokeDataset& ds,
                    const Split& split, const NoiseSpec& noise,
                    const MelConfig& mel_cfg) {
  if (split.test.empty()) throw std::invalid_argument("evaluate: empty test split");

  std::vector<std::vector<double>> counts(kNumKeys, std::vector<double>(kNumKeys, 0.0));
  std::vector<int> per_class(kNumKeys, 0);
  int correct = 0;
  for (std::size_t idx : split.test) {
    const auto& item = ds.items.at(idx);
    Waveform x = item.wave;
    if (noise.eta > 0.0) {
      x = add_gaussian_noise(x, {noise.eta, Rng::derive(noise.seed, idx)});
    }
    const auto [pred, score] = model.predict(mel_spectrogram(x, mel_cfg));
    counts[static_cast<std::size_t>(item.label)][static_cast<std::size_t>(pred)] += 1.0;
    ++per_class[static_cast<std::size_t>(item.label)];
    if (pred == item.label) ++correct;
  }
  for (int k = 0; k < kNumKeys; ++k) {
    if (per_class[static_cast<std::size_t>(k)] == 0) {
      throw std::invalid_argument(std::string("evaluate: class '") + index_symbol(k) +
                                  "' has no test items");
    }
  }

  EvalResult res;
  res.accuracy = static_cast<double>(correct) / static_cast<double>(split.test.size());
  res.cm36.n = kNumKeys;
  res.cm36.p.assign(static_cast<std::size_t>(kNumKeys) * kNumKeys, 0.0);
  for (int r = 0; r < kNumKeys; ++r) {
    for (int c = 0; c < kNumKeys; ++c) {
      res.cm36.at(r, c) = counts[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] /
                          per_class[static_cast<std::size_t>(r)];
    }
  }
  res.cm36.validate();
  return res;
}

ConfusionMatrix extend_with_space(const ConfusionMatrix& cm36) {
  cm36.validate();
  if (cm36.n != kNumKeys) throw std::invalid_argument("extend_with_space: expected 36x36");

  ConfusionMatrix cm;
  cm.n = kAlphabetSize;
  cm.p.assign(static_cast<std::size_t>(kAlphabetSize) * kAlphabetSize, 0.0);
  double diag_sum = 0.0;
  for (int r = 0; r < kNumKeys; ++r) {
    for (int c = 0; c < kNumKeys; ++c) cm.at(r, c) = cm36.at(r, c);
    diag_sum += cm36.at(r, r);
  }
  const double space_diag = diag_sum / kNumKeys;
  cm.at(kSpaceIndex, kSpaceIndex) = space_diag;
  for (int c = 0; c < kNumKeys; ++c) {
    cm.at(kSpaceIndex, c) = (1.0 - space_diag) / kNumKeys;
  }
  cm.validate();
  return cm;
}

std::string simulate_channel(const ConfusionMatrix& cm, std::string_view text,
                             std::uint64_t seed) {
  cm.validate();
  Rng rng(seed);
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    const int row = symbol_index(ch);
    if (row >= cm.n) throw AlphabetError("simulate_channel: symbol outside matrix");
    const double u = rng.uniform();
    double acc = 0.0;
    int pick = cm.n - 1;
    for (int c = 0; c < cm.n; ++c) {
      acc += cm.at(row, c);
      if (u < acc) {
        pick = c;
        break;
      }
    }
    out.push_back(index_symbol(pick));
  }
  return out;
}

void save_model(const CentroidModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<double> flat;
  const std::size_t dim = model.centroids.empty() ? 0 : model.centroids[0].size();
  flat.reserve(model.centroids.size() * dim);
  for (const auto& c : model.centroids) flat.insert(flat.end(), c.begin(), c.end());
  write_matrix(dir / "centroids.mat", model.centroids.size(), dim, flat);

  json meta;
  meta["mel"] = {{"n_mels", model.mel_config.n_mels},
                 {"n_fft", model.mel_config.n_fft},
                 {"hop_length", model.mel_config.hop_length},
                 {"sample_rate_hz", model.mel_config.sample_rate_hz},
                 {"fmin", model.mel_config.fmin},
                 {"fmax", model.mel_config.fmax},
                 {"target_width", model.mel_config.target_width}};
  meta["augment"] = {{"noise_eta", model.training_augment.noise_eta},
                     {"timeshift_fraction", model.training_augment.timeshift_fraction},
                     {"mask_fraction", model.training_augment.mask.max_mask_fraction},
                     {"masks_per_axis", model.training_augment.mask.masks_per_axis},
                     {"seed", model.training_augment.seed}};
  std::ofstream f(dir / "model.json");
  f << meta.dump(2) << "\n";
}

CentroidModel load_model(const std::filesystem::path& dir) {
  std::ifstream f(dir / "model.json");
  if (!f) throw std::runtime_error("load_model: cannot open " + (dir / "model.json").string());
  json meta = json::parse(f);
  CentroidModel model;
  const auto& mel = meta.at("mel");
  model.mel_config = {.n_mels = mel.at("n_mels").get<int>(),
                      .n_fft = mel.at("n_fft").get<int>(),
                      .hop_length = mel.at("hop_length").get<int>(),
                      .sample_rate_hz = mel.at("sample_rate_hz").get<int>(),
                      .fmin = mel.at("fmin").get<double>(),
                      .fmax = mel.at("fmax").get<double>(),
                      .target_width = mel.at("target_width").get<int>()};
  const auto& aug = meta.at("augment");
  model.training_augment.noise_eta = aug.at("noise_eta").get<double>();
  model.training_augment.timeshift_fraction = aug.at("timeshift_fraction").get<double>();
  model.training_augment.mask.max_mask_fraction = aug.at("mask_fraction").get<double>();
  model.training_augment.mask.masks_per_axis = aug.at("masks_per_axis").get<int>();
  model.training_augment.seed = aug.at("seed").get<std::uint64_t>();

  std::size_t rows = 0, cols = 0;
  const auto flat = read_matrix(dir / "centroids.mat", rows, cols);
  model.centroids.assign(rows, FeatureVector(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(flat.begin() + static_cast<long>(r * cols),
              flat.begin() + static_cast<long>((r + 1) * cols),
              model.centroids[r].begin());
  }
  return model;
}

}  // namespace asca
