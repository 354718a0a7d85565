#include "spoofprobe/vad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spoofprobe {

void validate(const VadConfig& cfg) {
  if (!(cfg.shift_ms > 0.0 && cfg.frame_ms > cfg.shift_ms)) {
    throw std::invalid_argument("VAD requires frame_ms > shift_ms > 0");
  }
  if (!(cfg.min_silence_ms >= cfg.frame_ms)) {
    throw std::invalid_argument("VAD requires min_silence_ms >= frame_ms");
  }
}

FrameGrid frame_grid(std::size_t n_samples, int sample_rate_hz, const VadConfig& cfg) {
  validate(cfg);
  FrameGrid g;
  g.frame_len = ms_to_samples(cfg.frame_ms, sample_rate_hz);
  g.shift = ms_to_samples(cfg.shift_ms, sample_rate_hz);
  if (g.frame_len == 0 || g.shift == 0) throw std::invalid_argument("VAD frame shorter than a sample");
  g.count = n_samples >= g.frame_len ? (n_samples - g.frame_len) / g.shift + 1 : 0;
  return g;
}

std::vector<FrameEnergy> frame_energies(const Waveform& w, const VadConfig& cfg) {
  const FrameGrid g = frame_grid(w.size(), w.sample_rate_hz, cfg);
  if (g.count == 0) throw std::invalid_argument("waveform is shorter than one VAD frame");
  std::vector<FrameEnergy> out(g.count);
  for (std::size_t k = 0; k < g.count; ++k) {
    const std::size_t start = k * g.shift;
    const double ms = mean_square(std::span<const double>(w.samples).subspan(start, g.frame_len));
    out[k] = {start, 10.0 * std::log10(ms + kEnergyFloor)};
  }
  return out;
}

double speech_threshold_db(const std::vector<FrameEnergy>& frames, const VadConfig& cfg) {
  double mean_lin = 0.0;
  for (const auto& f : frames) mean_lin += std::pow(10.0, f.energy_db / 10.0);
  mean_lin /= static_cast<double>(frames.size());
  const double relative = 10.0 * std::log10(mean_lin) + cfg.energy_threshold_db;
  return std::max(relative, cfg.absolute_floor_db);
}

std::vector<bool> speech_frames(const Waveform& w, const VadConfig& cfg) {
  const auto frames = frame_energies(w, cfg);
  const double threshold = speech_threshold_db(frames, cfg);
  std::vector<bool> speech(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) speech[k] = frames[k].energy_db >= threshold;
  return speech;
}

std::vector<bool> speech_mask(const Waveform& w, const VadConfig& cfg) {
  const FrameGrid g = frame_grid(w.size(), w.sample_rate_hz, cfg);
  const auto speech = speech_frames(w, cfg);
  std::vector<bool> mask(w.size(), false);
  for (std::size_t k = 0; k < speech.size(); ++k) {
    if (!speech[k]) continue;
    const std::size_t start = k * g.shift;
    std::fill(mask.begin() + static_cast<std::ptrdiff_t>(start),
              mask.begin() + static_cast<std::ptrdiff_t>(start + g.frame_len), true);
  }
  const std::size_t covered = (g.count - 1) * g.shift + g.frame_len;
  if (speech.back()) std::fill(mask.begin() + static_cast<std::ptrdiff_t>(covered), mask.end(), true);
  return mask;
}

namespace {

TrimResult trim_once(const Waveform& w, const VadConfig& cfg) {
  const FrameGrid g = frame_grid(w.size(), w.sample_rate_hz, cfg);
  const auto energies = frame_energies(w, cfg);
  const auto mask = speech_mask(w, cfg);

  TrimResult result;
  result.audio.sample_rate_hz = w.sample_rate_hz;
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < energies.size(); ++k) {
      if (energies[k].energy_db > energies[best].energy_db) best = k;
    }
    const auto first = w.samples.begin() + static_cast<std::ptrdiff_t>(energies[best].start);
    result.audio.samples.assign(first, first + static_cast<std::ptrdiff_t>(g.frame_len));
    result.fully_silent = true;
    result.removed_samples = w.size() - g.frame_len;
    return result;
  }

  const std::size_t max_keep = ms_to_samples(cfg.min_silence_ms, w.sample_rate_hz);
  result.audio.samples.reserve(w.size());
  std::size_t i = 0;
  while (i < w.size()) {
    std::size_t j = i;
    while (j < w.size() && mask[j] == mask[i]) ++j;
    const std::size_t run = j - i;
    if (mask[i] || run <= max_keep) {
      result.audio.samples.insert(result.audio.samples.end(),
                                  w.samples.begin() + static_cast<std::ptrdiff_t>(i),
                                  w.samples.begin() + static_cast<std::ptrdiff_t>(j));
    } else {
      result.removed_samples += run;
    }
    i = j;
  }
  return result;
}

}  // namespace

// Repeats single passes until nothing more is removed: excision raises the
// mean energy and shifts the frame grid, so one pass alone is not idempotent.
TrimResult trim_silence(const Waveform& w, const VadConfig& cfg) {
  TrimResult result = trim_once(w, cfg);
  while (!result.fully_silent && result.removed_samples > 0) {
    const FrameGrid g = frame_grid(result.audio.size(), w.sample_rate_hz, cfg);
    if (g.count == 0) break;
    TrimResult next = trim_once(result.audio, cfg);
    if (next.removed_samples == 0) break;
    next.removed_samples += result.removed_samples;
    result = std::move(next);
  }
  return result;
}

double leading_silence_ms(const Waveform& w, const VadConfig& cfg) {
  const FrameGrid g = frame_grid(w.size(), w.sample_rate_hz, cfg);
  const auto speech = speech_frames(w, cfg);
  for (std::size_t k = 0; k < speech.size(); ++k) {
    if (speech[k]) return 1e3 * static_cast<double>(k * g.shift) / w.sample_rate_hz;
  }
  return 1e3 * w.duration_s();
}

}  // namespace spoofprobe
