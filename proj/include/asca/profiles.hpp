#pragma once

#include "asca/signal.hpp"
#include "asca/spectrogram.hpp"

namespace asca {

// Dataset profile defaults. Phone/Zoom values follow the published
// hyperparameters; the synthetic profile is scaled down so the full pipeline
// runs in seconds.

struct ProfileDefaults {
  MelConfig mel;
  double timeshift_fraction;
  MaskSpec mask;
};

inline ProfileDefaults phone_profile() {
  return {.mel = {.n_mels = 64,
                  .n_fft = 1024,
                  .hop_length = 300,
                  .sample_rate_hz = 44100,
                  .fmin = 0.0,
                  .fmax = 22050.0,
                  .target_width = 64},
          .timeshift_fraction = 0.3,
          .mask = {.max_mask_fraction = 0.1, .masks_per_axis = 2, .seed = 0}};
}

// Direct-transformation variant: 224x224 images straight from the STFT.
inline ProfileDefaults phone_direct_profile() {
  return {.mel = {.n_mels = 224,
                  .n_fft = 1024,
                  .hop_length = 85,
                  .sample_rate_hz = 44100,
                  .fmin = 0.0,
                  .fmax = 22050.0,
                  .target_width = 224},
          .timeshift_fraction = 0.3,
          .mask = {.max_mask_fraction = 0.03, .masks_per_axis = 2, .seed = 0}};
}

inline ProfileDefaults zoom_profile() {
  ProfileDefaults p = phone_profile();
  p.mel.hop_length = 226;
  p.timeshift_fraction = 0.4;
  return p;
}

inline ProfileDefaults zoom_direct_profile() {
  ProfileDefaults p = phone_direct_profile();
  p.mel.hop_length = 64;
  p.timeshift_fraction = 0.4;
  return p;
}

inline ProfileDefaults synthetic_profile() {
  return {.mel = {.n_mels = 48,
                  .n_fft = 512,
                  .hop_length = 128,
                  .sample_rate_hz = 8000,
                  .fmin = 0.0,
                  .fmax = 4000.0,
                  .target_width = 32},
          // No time shift: shifting pads with digital zeros, which drags the
          // per-image dB minimum to the floor and crushes the dynamic range of
          // the synthetic clips. Real recordings have ambient noise instead.
          .timeshift_fraction = 0.0,
          .mask = {.max_mask_fraction = 0.1, .masks_per_axis = 2, .seed = 0}};
}

inline SegmentationConfig default_segmentation(const MelConfig& mel) {
  SegmentationConfig cfg;
  cfg.clip_length = static_cast<std::size_t>(mel.clip_length());
  cfg.energy_window = std::min<std::size_t>(1024, static_cast<std::size_t>(mel.n_fft));
  cfg.energy_hop = cfg.energy_window / 4;
  return cfg;
}

}  // namespace asca
