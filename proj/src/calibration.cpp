#include "asca/calibration.hpp"

#include <cmath>
#include <string>

#include "asca/errors.hpp"
#include "asca/metrics.hpp"
#include "asca/rng.hpp"

namespace asca {

double measure_accuracy_audio(double eta, const SentenceCorpus& corpus,
                              const KeystrokeDataset& ds, const KeyClassifier& model,
                              const MelConfig& mel_cfg, std::uint64_t seed) {
  if (corpus.sentences.empty()) {
    throw std::invalid_argument("measure_accuracy: empty probe corpus");
  }
  const auto transcripts = attack_audio(corpus, ds, model, mel_cfg, eta, seed);
  double acc = 0.0;
  for (const auto& t : transcripts) acc += char_accuracy(t.truth, t.predicted);
  return acc / static_cast<double>(transcripts.size());
}

CalibrationResult calibrate_eta(double target_accuracy, EtaBounds bounds,
                                const MeasureFn& measure,
                                const CalibrationOptions& opts) {
  if (opts.tolerance <= 0.0) throw std::invalid_argument("calibrate_eta: tolerance <= 0");
  if (opts.samples_per_probe <= 0 || opts.max_iterations <= 0) {
    throw std::invalid_argument("calibrate_eta: probe and iteration counts must be positive");
  }

  // Probe = mean of samples_per_probe independent runs on a seed ladder tied
  // to the iteration index, so the returned eta re-measures identically.
  const auto probe = [&](double eta, int iteration) {
    double acc = 0.0;
    for (int s = 0; s < opts.samples_per_probe; ++s) {
      acc += measure(eta, Rng::derive(opts.seed, static_cast<std::uint64_t>(iteration) *
                                                     1000 + static_cast<std::uint64_t>(s)));
    }
    return acc / opts.samples_per_probe;
  };

  // Both endpoints share the iteration-0 seed ladder (common random numbers),
  // so an endpoint returned as the result re-measures identically.
  const double acc_low = probe(bounds.low, 0);
  const double acc_high = probe(bounds.high, 0);
  if (!(acc_low >= target_accuracy && target_accuracy >= acc_high)) {
    throw BracketError("calibrate_eta: target " + std::to_string(target_accuracy) +
                       " not bracketed by [" + std::to_string(acc_high) + ", " +
                       std::to_string(acc_low) + "]");
  }

  CalibrationResult best;
  best.target = target_accuracy;
  best.samples_per_probe = opts.samples_per_probe;
  best.seed = opts.seed;
  double best_err = 1e300;
  const auto consider = [&](double eta, double acc, int iter) {
    const double err = std::abs(acc - target_accuracy);
    if (err < best_err) {
      best_err = err;
      best.eta = eta;
      best.achieved_accuracy = acc;
      best.iterations = iter;
    }
  };
  consider(bounds.low, acc_low, 0);
  consider(bounds.high, acc_high, 0);
  if (best_err <= opts.tolerance) {
    best.converged = true;
    return best;
  }

  double lo = bounds.low, hi = bounds.high;
  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double acc = probe(mid, iter);
    consider(mid, acc, iter);
    if (best_err <= opts.tolerance) {
      best.converged = true;
      return best;
    }
    if (acc > target_accuracy) {
      lo = mid;  // still too accurate, push noise up
    } else {
      hi = mid;
    }
  }
  throw NonConvergence("calibrate_eta: tolerance " + std::to_string(opts.tolerance) +
                           " unmet after " + std::to_string(opts.max_iterations) +
                           " iterations (best |err| = " + std::to_string(best_err) + ")",
                       best);
}

}  // namespace asca
