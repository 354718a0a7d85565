#include "spoofprobe/features.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spoofprobe/fft.hpp"

namespace spoofprobe {
namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

void validate(const FeatureConfig& cfg) {
  if (cfg.fft_size < 2 || !is_power_of_two(static_cast<std::size_t>(cfg.fft_size))) {
    throw std::invalid_argument("fft_size must be a power of two");
  }
  if (cfg.hop < 1) throw std::invalid_argument("hop must be positive");
  if (cfg.n_mel_bands < 2) throw std::invalid_argument("n_mel_bands must be >= 2");
  if (!(cfg.log_floor > 0.0)) throw std::invalid_argument("log_floor must be positive");
}

std::vector<std::vector<double>> mel_filterbank(const FeatureConfig& cfg, int sample_rate_hz) {
  validate(cfg);
  const int n_bins = cfg.fft_size / 2 + 1;
  const double nyquist = 0.5 * sample_rate_hz;
  const double mel_max = hz_to_mel(nyquist);
  std::vector<double> edges(static_cast<std::size_t>(cfg.n_mel_bands) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / static_cast<double>(edges.size() - 1));
  }
  std::vector<std::vector<double>> bank(static_cast<std::size_t>(cfg.n_mel_bands),
                                        std::vector<double>(static_cast<std::size_t>(n_bins), 0.0));
  for (int b = 0; b < cfg.n_mel_bands; ++b) {
    const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate_hz / cfg.fft_size;
      double v = 0.0;
      if (f > lo && f <= mid) v = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) v = (hi - f) / (hi - mid);
      bank[b][k] = v;
    }
  }
  return bank;
}

FeatureExtractor::FeatureExtractor(FeatureConfig cfg, int sample_rate_hz)
    : cfg_(cfg), sample_rate_hz_(sample_rate_hz) {
  validate(cfg_);
  if (sample_rate_hz <= 0) throw std::invalid_argument("sample rate must be positive");
  window_.resize(static_cast<std::size_t>(cfg_.fft_size));
  for (int n = 0; n < cfg_.fft_size; ++n) {
    window_[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / cfg_.fft_size);
  }
  filters_ = mel_filterbank(cfg_, sample_rate_hz);
}

std::vector<std::vector<double>> FeatureExtractor::log_mel_frames(const Waveform& w) const {
  const auto n = w.size();
  const auto len = static_cast<std::size_t>(cfg_.fft_size);
  const auto hop = static_cast<std::size_t>(cfg_.hop);
  if (n < len) throw std::invalid_argument("waveform is shorter than one FFT frame");
  if (w.sample_rate_hz != sample_rate_hz_) throw std::invalid_argument("sample rate mismatch");
  const std::size_t frames = (n - len) / hop + 1;

  std::vector<std::vector<double>> out(frames, std::vector<double>(filters_.size()));
  std::vector<double> frame(len);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t i = 0; i < len; ++i) frame[i] = w.samples[f * hop + i] * window_[i];
    const auto power = power_spectrum(frame);
    for (std::size_t b = 0; b < filters_.size(); ++b) {
      double e = 0.0;
      for (std::size_t k = 0; k < power.size(); ++k) e += filters_[b][k] * power[k];
      out[f][b] = std::log(std::max(e, cfg_.log_floor));
    }
  }
  return out;
}

std::vector<double> FeatureExtractor::extract(const Waveform& w) const {
  const auto frames = log_mel_frames(w);
  const std::size_t bands = filters_.size();
  std::vector<double> feat(2 * bands, 0.0);
  const auto count = static_cast<double>(frames.size());
  for (std::size_t b = 0; b < bands; ++b) {
    double mean = 0.0;
    for (const auto& fr : frames) mean += fr[b];
    mean /= count;
    double var = 0.0;
    for (const auto& fr : frames) var += (fr[b] - mean) * (fr[b] - mean);
    feat[b] = mean;
    feat[bands + b] = std::sqrt(var / count);
  }
  return feat;
}

std::vector<double> extract_features(const Waveform& w, const FeatureConfig& cfg) {
  return FeatureExtractor(cfg, w.sample_rate_hz).extract(w);
}

}  // namespace spoofprobe
