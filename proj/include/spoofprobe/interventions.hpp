#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spoofprobe/waveform.hpp"

namespace spoofprobe {

enum class InterventionType { codec, noise, loudness };

std::string_view to_string(InterventionType type);
InterventionType parse_intervention(std::string_view text);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

// One intervention operator plus the ranges its parameters are drawn from.
struct InterventionSpec {
  InterventionType type = InterventionType::noise;
  Range snr_db{10.0, 40.0};
  Range target_dbfs{-30.0, -20.0};
  Range cutoff_hz{3000.0, 7000.0};
  std::vector<int> bits{8, 10, 12};
  // Optional external encoder for the codec kind: a shell command with {in}
  // and {out} placeholders naming WAV files. Empty means the built-in
  // surrogate.
  std::string external_command;
};

void validate(const InterventionSpec& spec, int sample_rate_hz);

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

// Adds Gaussian noise scaled so the power ratio of (output - input) to input
// is exactly snr_db before clamping. snr_db == +inf returns the input.
// Throws std::invalid_argument for an all-zero input.
Waveform add_white_noise(const Waveform& w, double snr_db, std::uint64_t seed);

struct LoudnessResult {
  Waveform audio;
  std::size_t clipped = 0;
};

// Scales to target_dbfs RMS, then clamps to [-1, 1] and reports the number
// of clamped samples. Throws std::invalid_argument for an all-zero input.
LoudnessResult normalize_loudness(const Waveform& w, double target_dbfs);

inline constexpr int kCodecTaps = 255;

// Lossy-codec surrogate: 255-tap Hann-windowed-sinc low-pass at cutoff_hz
// (group delay removed), then a mid-rise uniform quantizer with 2^bits
// levels over [-1, 1].
Waveform codec_degrade(const Waveform& w, double cutoff_hz, int bits);

// Runs an external file-in/file-out encoder and re-aligns the result to the
// input length.
Waveform external_codec(const Waveform& w, const std::string& command_template);

// Truncates, or pads with the last sample, to exactly n samples.
Waveform align_length(Waveform w, std::size_t n);

// Parameters drawn for one application.
struct InterventionDraw {
  double snr_db = 0.0;
  double target_dbfs = 0.0;
  double cutoff_hz = 0.0;
  int bits = 16;
  std::uint64_t noise_seed = 0;
};

// Draws are uniform over each range; bits uniformly from the listed set.
InterventionDraw draw_parameters(const InterventionSpec& spec, std::uint64_t seed);

// seed should already identify the item (see derive_seed); the only input
// read is the audio itself.
Waveform apply_intervention(const Waveform& w, const InterventionSpec& spec, std::uint64_t seed);

}  // namespace spoofprobe
