#pragma once

#include <filesystem>

#include "asca/signal.hpp"

namespace asca {

// Reads mono or multi-channel PCM WAV (16-bit integer or 32-bit float);
// multi-channel inputs are down-mixed by averaging.
Waveform read_wav(const std::filesystem::path& path);

// Writes 16-bit PCM mono at the waveform's sample rate; samples are clamped
// to [-1, 1] at the codec boundary.
void write_wav(const std::filesystem::path& path, const Waveform& w);

// Writes 32-bit float mono; no clamping, used for clip persistence so a
// reloaded dataset round-trips exactly.
void write_wav_f32(const std::filesystem::path& path, const Waveform& w);

}  // namespace asca
