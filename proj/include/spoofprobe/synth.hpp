#pragma once

#include <cstdint>
#include <vector>

#include "spoofprobe/waveform.hpp"

namespace spoofprobe {

struct Envelope {
  double attack = 0.1;
  double sustain = 0.75;
  double release = 0.15;
};

// Parameters of the synthetic voiced utterance. Per-item variation (pitch,
// formant positions, level, phases) is drawn from the seed passed to
// synth_utterance; the fields here fix the population.
struct SynthParams {
  double duration_s = 1.0;
  double f0_hz = 140.0;
  // Relative spread of the per-item fundamental (log-normal sigma).
  double f0_spread = 0.2;
  int n_harmonics = 30;
  std::vector<double> formant_centers_hz{700.0, 1200.0, 2600.0};
  double formant_bandwidth_hz = 300.0;
  // Relative spread of per-item formant positions (uniform +-).
  double formant_spread = 0.1;
  Envelope envelope;
  // Aspiration noise level relative to the voiced component.
  double breath_db = -35.0;
  // Per-item level is drawn uniformly in level_dbfs +- level_spread_db.
  double level_dbfs = -20.0;
  double level_spread_db = 4.0;

  // Spoof-only artifact controls.
  double artifact_strength = 0.0;
  // Per-item strength is artifact_strength * (1 - artifact_spread * u), u ~ U[0,1).
  double artifact_spread = 0.0;
  double notch_low_hz = 2000.0;
  double notch_high_hz = 3000.0;
  double artifact_frame_ms = 20.0;

  double leading_silence_ms = 0.0;
  double trailing_silence_ms = 0.0;
  int sample_rate_hz = 16000;
};

// Throws std::invalid_argument for a non-positive duration, an empty
// harmonic set or out-of-range fields.
void validate(const SynthParams& p);

// Deterministic in (params, label, seed). The spoof output is the bonafide
// synthesis for the same seed with a band notch and frame-boundary phase
// jumps injected, both scaled by the artifact strength; with strength 0 the
// two classes are bitwise identical.
Waveform synth_utterance(const SynthParams& params, Label label, std::uint64_t seed);

}  // namespace spoofprobe
