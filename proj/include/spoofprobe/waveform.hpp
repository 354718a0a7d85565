#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace spoofprobe {

enum class Label { bonafide, spoof };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

// Mono audio. Samples are nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = 16000;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate_hz);
  }
  std::span<const double> view() const { return samples; }

  bool operator==(const Waveform&) const = default;
};

// Throws std::invalid_argument on non-finite samples, an empty buffer or a
// non-positive rate.
void validate(const Waveform& w);

double mean_square(std::span<const double> x);

// 20*log10(RMS). Returns -infinity for an all-zero signal.
double rms_dbfs(const Waveform& w);

// Clamps samples into [-1, 1]; returns how many were out of range.
std::size_t clamp_unit(std::vector<double>& samples);

inline std::size_t ms_to_samples(double ms, int sample_rate_hz) {
  return static_cast<std::size_t>(ms * 1e-3 * sample_rate_hz + 0.5);
}

}  // namespace spoofprobe
