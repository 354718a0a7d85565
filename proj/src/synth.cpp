#include "spoofprobe/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spoofprobe/fir.hpp"
#include "spoofprobe/rng.hpp"

namespace spoofprobe {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kNotchTaps = 255;

double envelope_at(double pos, const Envelope& env) {
  double ramp = 1.0;
  if (env.attack > 0.0 && pos < env.attack) ramp = pos / env.attack;
  const double release_start = 1.0 - env.release;
  if (env.release > 0.0 && pos > release_start) ramp = std::min(ramp, (1.0 - pos) / env.release);
  ramp = std::clamp(ramp, 0.0, 1.0);
  return 0.5 - 0.5 * std::cos(std::numbers::pi * ramp);
}

}  // namespace

void validate(const SynthParams& p) {
  if (!(p.duration_s > 0.0)) throw std::invalid_argument("duration_s must be positive");
  if (p.n_harmonics < 1) throw std::invalid_argument("harmonic set is empty");
  if (p.sample_rate_hz <= 0) throw std::invalid_argument("sample_rate_hz must be positive");
  if (!(p.f0_hz >= 80.0 && p.f0_hz <= 300.0)) throw std::invalid_argument("f0_hz must lie in [80, 300]");
  if (p.f0_spread < 0.0 || p.formant_spread < 0.0 || p.formant_spread >= 1.0 ||
      p.level_spread_db < 0.0) {
    throw std::invalid_argument("spread parameters out of range");
  }
  if (p.formant_centers_hz.empty()) throw std::invalid_argument("at least one formant is required");
  for (double f : p.formant_centers_hz) {
    if (!(f > 0.0)) throw std::invalid_argument("formant centers must be positive");
  }
  if (!(p.formant_bandwidth_hz > 0.0)) throw std::invalid_argument("formant bandwidth must be positive");
  const Envelope& e = p.envelope;
  if (e.attack < 0.0 || e.sustain < 0.0 || e.release < 0.0 ||
      e.attack + e.sustain + e.release > 1.0 + 1e-9) {
    throw std::invalid_argument("envelope fractions must be non-negative and sum to at most 1");
  }
  if (p.artifact_strength < 0.0 || p.artifact_strength > 1.0) {
    throw std::invalid_argument("artifact_strength must lie in [0, 1]");
  }
  if (p.artifact_spread < 0.0 || p.artifact_spread > 1.0) {
    throw std::invalid_argument("artifact_spread must lie in [0, 1]");
  }
  if (!(p.notch_low_hz > 0.0 && p.notch_low_hz < p.notch_high_hz &&
        p.notch_high_hz < 0.5 * p.sample_rate_hz)) {
    throw std::invalid_argument("notch band must lie inside (0, Nyquist)");
  }
  if (!(p.artifact_frame_ms > 0.0)) throw std::invalid_argument("artifact_frame_ms must be positive");
  if (p.leading_silence_ms < 0.0 || p.trailing_silence_ms < 0.0) {
    throw std::invalid_argument("silence padding must be non-negative");
  }
}

Waveform synth_utterance(const SynthParams& p, Label label, std::uint64_t seed) {
  validate(p);
  const double fs = p.sample_rate_hz;
  const auto n_speech = static_cast<std::size_t>(std::llround(p.duration_s * fs));
  if (n_speech == 0) throw std::invalid_argument("duration_s is shorter than one sample");

  Rng voice(derive_seed(seed, "voice"));
  const double f0 = std::clamp(p.f0_hz * std::exp(p.f0_spread * voice.normal()), 80.0, 300.0);
  const double declination = voice.uniform(0.0, 0.1);
  const double vib_rate = voice.uniform(4.0, 6.0);
  const double vib_depth = voice.uniform(0.005, 0.02);
  const double vib_phase = voice.uniform(0.0, kTwoPi);
  std::vector<double> formants;
  for (double c : p.formant_centers_hz) {
    formants.push_back(c * voice.uniform(1.0 - p.formant_spread, 1.0 + p.formant_spread));
  }
  const double level_db = p.level_dbfs + voice.uniform(-p.level_spread_db, p.level_spread_db);

  // Harmonic amplitudes from a sum of Gaussian resonances over a gentle tilt.
  const double max_ratio = (1.0 + declination) * (1.0 + vib_depth);
  std::vector<double> amp;
  std::vector<double> phase0;
  for (int h = 1; h <= p.n_harmonics; ++h) {
    const double f = h * f0;
    if (f * max_ratio >= 0.475 * fs) break;
    double a = 0.02;
    for (double fc : formants) {
      const double d = (f - fc) / p.formant_bandwidth_hz;
      a += std::exp(-0.5 * d * d);
    }
    amp.push_back(a / std::sqrt(static_cast<double>(h)));
    phase0.push_back(voice.uniform(0.0, kTwoPi));
  }
  if (amp.empty()) throw std::invalid_argument("harmonic set is empty below Nyquist");
  const std::size_t n_harm = amp.size();

  // Artifact randomness lives in its own stream so the voice is unchanged.
  const bool inject = label == Label::spoof && p.artifact_strength > 0.0;
  double strength = 0.0;
  std::size_t frame_len = 1;
  std::vector<double> jumps;
  if (inject) {
    Rng art(derive_seed(seed, "artifact"));
    strength = p.artifact_strength * (1.0 - p.artifact_spread * art.uniform());
    frame_len = std::max<std::size_t>(1, static_cast<std::size_t>(p.artifact_frame_ms * 1e-3 * fs));
    const std::size_t n_frames = (n_speech + frame_len - 1) / frame_len;
    jumps.resize(n_frames * n_harm);
    for (std::size_t k = 0; k < n_frames; ++k) {
      for (std::size_t h = 0; h < n_harm; ++h) {
        jumps[k * n_harm + h] = k == 0 ? 0.0 : strength * 0.5 * std::numbers::pi * art.uniform(-1.0, 1.0);
      }
    }
  }

  std::vector<double> x(n_speech);
  double phase = 0.0;
  for (std::size_t n = 0; n < n_speech; ++n) {
    const double t = static_cast<double>(n) / fs;
    const double pos = static_cast<double>(n) / static_cast<double>(n_speech);
    const double base = f0 * (1.0 + declination * (1.0 - 2.0 * pos));
    const double inst = base * (1.0 + vib_depth * std::sin(kTwoPi * vib_rate * t + vib_phase));
    double acc = 0.0;
    if (inject) {
      const double* jump = &jumps[(n / frame_len) * n_harm];
      for (std::size_t h = 0; h < n_harm; ++h) {
        acc += amp[h] * std::sin(static_cast<double>(h + 1) * phase + phase0[h] + jump[h]);
      }
    } else {
      for (std::size_t h = 0; h < n_harm; ++h) {
        acc += amp[h] * std::sin(static_cast<double>(h + 1) * phase + phase0[h]);
      }
    }
    x[n] = acc * envelope_at(pos, p.envelope);
    phase = std::fmod(phase + kTwoPi * inst / fs, kTwoPi);
  }

  double voiced_ms = 0.0;
  for (double v : x) voiced_ms += v * v;
  voiced_ms /= static_cast<double>(n_speech);
  const double breath = std::pow(10.0, p.breath_db / 20.0) * std::sqrt(voiced_ms);
  for (std::size_t n = 0; n < n_speech; ++n) {
    const double pos = static_cast<double>(n) / static_cast<double>(n_speech);
    x[n] += breath * envelope_at(pos, p.envelope) * voice.normal();
  }

  // Gain comes from the artifact-free signal so both classes share it.
  double ms = 0.0;
  for (double v : x) ms += v * v;
  ms /= static_cast<double>(n_speech);
  const double gain = ms > 0.0 ? std::pow(10.0, level_db / 20.0) / std::sqrt(ms) : 0.0;

  if (inject) {
    const auto band = design_bandpass(p.notch_low_hz, p.notch_high_hz, fs, kNotchTaps);
    const auto in_band = filter_aligned(x, band);
    for (std::size_t n = 0; n < n_speech; ++n) x[n] -= strength * in_band[n];
  }

  const std::size_t lead = ms_to_samples(p.leading_silence_ms, p.sample_rate_hz);
  const std::size_t trail = ms_to_samples(p.trailing_silence_ms, p.sample_rate_hz);
  Waveform w;
  w.sample_rate_hz = p.sample_rate_hz;
  w.samples.assign(lead + n_speech + trail, 0.0);
  for (std::size_t n = 0; n < n_speech; ++n) w.samples[lead + n] = gain * x[n];
  clamp_unit(w.samples);
  return w;
}

}  // namespace spoofprobe
