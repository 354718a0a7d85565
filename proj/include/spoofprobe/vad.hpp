#pragma once

#include <cstddef>
#include <vector>

#include "spoofprobe/waveform.hpp"

namespace spoofprobe {

inline constexpr double kEnergyFloor = 1e-12;

struct VadConfig {
  double frame_ms = 25.0;
  double shift_ms = 8.0;
  // Frames below (10*log10(mean linear frame energy) + energy_threshold_db)
  // are non-speech.
  double energy_threshold_db = -30.0;
  // Frames below this absolute level are always non-speech, which makes an
  // all-zero input register as silent.
  double absolute_floor_db = -80.0;
  double min_silence_ms = 50.0;
};

void validate(const VadConfig& cfg);

struct FrameEnergy {
  std::size_t start = 0;
  double energy_db = 0.0;
};

struct FrameGrid {
  std::size_t frame_len = 0;
  std::size_t shift = 0;
  std::size_t count = 0;
};

FrameGrid frame_grid(std::size_t n_samples, int sample_rate_hz, const VadConfig& cfg);

// 10*log10(mean square + eps) per frame. Throws std::invalid_argument if the
// waveform is shorter than one frame.
std::vector<FrameEnergy> frame_energies(const Waveform& w, const VadConfig& cfg);

double speech_threshold_db(const std::vector<FrameEnergy>& frames, const VadConfig& cfg);

// Speech flag per frame.
std::vector<bool> speech_frames(const Waveform& w, const VadConfig& cfg);

// Speech flag per sample: a sample is speech when a speech frame covers it.
// Samples past the last frame inherit the last frame's decision.
std::vector<bool> speech_mask(const Waveform& w, const VadConfig& cfg);

struct TrimResult {
  Waveform audio;
  bool fully_silent = false;
  std::size_t removed_samples = 0;
};

// Excises every run of non-speech samples longer than min_silence_ms and
// concatenates the rest in order; shorter runs are kept verbatim. Passes
// repeat until none removes anything, so trimming is idempotent. When no
// frame is speech, the highest-energy frame is returned and fully_silent is
// set.
TrimResult trim_silence(const Waveform& w, const VadConfig& cfg);

// Milliseconds before the first speech frame (the full duration if silent).
double leading_silence_ms(const Waveform& w, const VadConfig& cfg);

}  // namespace spoofprobe
