#pragma once

#include <vector>

#include "spoofprobe/waveform.hpp"

namespace spoofprobe {

struct FeatureConfig {
  int fft_size = 512;
  int hop = 160;
  int n_mel_bands = 24;
  double log_floor = 1e-10;

  int dim() const { return 2 * n_mel_bands; }
  bool operator==(const FeatureConfig&) const = default;
};

void validate(const FeatureConfig& cfg);

// Triangular mel filters (HTK mel scale) spanning 0 Hz to Nyquist, one row
// per band over fft_size/2 + 1 bins.
std::vector<std::vector<double>> mel_filterbank(const FeatureConfig& cfg, int sample_rate_hz);

class FeatureExtractor {
 public:
  FeatureExtractor(FeatureConfig cfg, int sample_rate_hz);

  const FeatureConfig& config() const { return cfg_; }

  // Natural-log mel band energies per Hann-windowed frame.
  std::vector<std::vector<double>> log_mel_frames(const Waveform& w) const;

  // [mean of each band over frames, population std of each band].
  // Throws std::invalid_argument when shorter than one FFT frame.
  std::vector<double> extract(const Waveform& w) const;

 private:
  FeatureConfig cfg_;
  int sample_rate_hz_;
  std::vector<double> window_;
  std::vector<std::vector<double>> filters_;
};

std::vector<double> extract_features(const Waveform& w, const FeatureConfig& cfg);

}  // namespace spoofprobe
