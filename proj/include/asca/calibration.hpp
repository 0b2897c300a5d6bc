#pragma once

#include <cstdint>
#include <functional>

#include "asca/attack.hpp"

namespace asca {

struct EtaBounds {
  double low = 0.0;   // quiet end, accuracy at or above target
  double high = 1.0;  // loud end, accuracy at or below target
};

struct CalibrationResult {
  double eta = 0.0;
  double achieved_accuracy = 0.0;
  double target = 0.0;
  int iterations = 0;
  int samples_per_probe = 0;
  std::uint64_t seed = 0;
  bool converged = false;
};

// Raised when the iteration cap is hit outside tolerance; carries the best
// iterate found.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& msg, CalibrationResult best)
      : std::runtime_error(msg), best_result(best) {}
  CalibrationResult best_result;
};

// Measures one attack run: mean char-alignment accuracy of the probe corpus
// at the given eta under the given seed.
using MeasureFn = std::function<double(double eta, std::uint64_t seed)>;

// Mean char_accuracy of an audio-path attack over the corpus.
double measure_accuracy_audio(double eta, const SentenceCorpus& corpus,
                              const KeystrokeDataset& ds, const KeyClassifier& model,
                              const MelConfig& mel_cfg, std::uint64_t seed);

struct CalibrationOptions {
  double tolerance = 0.02;
  int samples_per_probe = 8;  // independent attack runs averaged per probe
  int max_iterations = 30;
  std::uint64_t seed = 0;
};

// Bisection on eta against the noisy, monotone-in-expectation accuracy curve.
// Requires measure(bounds.low) >= target >= measure(bounds.high); throws
// BracketError otherwise, NonConvergence at the iteration cap.
CalibrationResult calibrate_eta(double target_accuracy, EtaBounds bounds,
                                const MeasureFn& measure,
                                const CalibrationOptions& opts = CalibrationOptions{});

}  // namespace asca
