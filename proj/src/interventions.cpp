#include "spoofprobe/interventions.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "spoofprobe/fir.hpp"
#include "spoofprobe/rng.hpp"
#include "spoofprobe/wav_io.hpp"

namespace spoofprobe {
namespace {

void require_nonzero(const Waveform& w, const char* what) {
  validate(w);
  if (mean_square(w.samples) == 0.0) {
    throw std::invalid_argument(std::string(what) + " is undefined for an all-zero input");
  }
}

void check_range(const Range& r, const char* name) {
  if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
    throw std::invalid_argument(std::string(name) + " range is empty or non-finite");
  }
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

}  // namespace

std::string_view to_string(InterventionType type) {
  switch (type) {
    case InterventionType::codec: return "codec";
    case InterventionType::noise: return "noise";
    case InterventionType::loudness: return "loudness";
  }
  return "?";
}

InterventionType parse_intervention(std::string_view text) {
  if (text == "codec" || text == "mp3") return InterventionType::codec;
  if (text == "noise") return InterventionType::noise;
  if (text == "loudness") return InterventionType::loudness;
  throw std::invalid_argument("unknown intervention '" + std::string(text) + "'");
}

void validate(const InterventionSpec& spec, int sample_rate_hz) {
  check_range(spec.snr_db, "snr_db");
  check_range(spec.target_dbfs, "target_dbfs");
  check_range(spec.cutoff_hz, "cutoff_hz");
  if (spec.snr_db.lo < 0.0 || spec.snr_db.hi > 60.0) {
    throw std::invalid_argument("snr_db range must lie within [0, 60] dB");
  }
  if (!(spec.cutoff_hz.lo > 0.0 && spec.cutoff_hz.hi < 0.5 * sample_rate_hz)) {
    throw std::invalid_argument("cutoff_hz range must lie within (0, Nyquist)");
  }
  if (spec.bits.empty()) throw std::invalid_argument("bit depth set is empty");
  for (int b : spec.bits) {
    if (b < 2 || b > 16) throw std::invalid_argument("bit depths must lie in [2, 16]");
  }
}

Waveform add_white_noise(const Waveform& w, double snr_db, std::uint64_t seed) {
  require_nonzero(w, "SNR");
  if (snr_db == kNoNoise) return w;
  if (!std::isfinite(snr_db)) throw std::invalid_argument("snr_db must be finite or +inf");

  Rng rng(seed);
  std::vector<double> noise(w.size());
  for (double& v : noise) v = rng.normal();
  // Scale by the realized noise power so the ratio is exact, not expected.
  const double p_signal = mean_square(w.samples);
  const double p_noise = mean_square(noise);
  const double g = std::sqrt(p_signal / (std::pow(10.0, snr_db / 10.0) * p_noise));

  Waveform out = w;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += g * noise[i];
  clamp_unit(out.samples);
  return out;
}

LoudnessResult normalize_loudness(const Waveform& w, double target_dbfs) {
  require_nonzero(w, "loudness normalization");
  const double g = std::pow(10.0, (target_dbfs - rms_dbfs(w)) / 20.0);
  LoudnessResult r{w, 0};
  for (double& s : r.audio.samples) s *= g;
  r.clipped = clamp_unit(r.audio.samples);
  return r;
}

Waveform codec_degrade(const Waveform& w, double cutoff_hz, int bits) {
  validate(w);
  if (!(cutoff_hz > 0.0 && cutoff_hz < 0.5 * w.sample_rate_hz)) {
    throw std::invalid_argument("codec cutoff must lie in (0, Nyquist)");
  }
  if (bits < 2 || bits > 16) throw std::invalid_argument("codec bit depth must lie in [2, 16]");

  const auto taps = design_lowpass(cutoff_hz, w.sample_rate_hz, kCodecTaps);
  Waveform out{filter_aligned(w.samples, taps), w.sample_rate_hz};

  const double levels = std::ldexp(1.0, bits);
  const double step = 2.0 / levels;
  for (double& s : out.samples) {
    double idx = std::floor((s + 1.0) / step);
    idx = std::clamp(idx, 0.0, levels - 1.0);
    s = -1.0 + (idx + 0.5) * step;
  }
  return out;
}

Waveform align_length(Waveform w, std::size_t n) {
  if (w.samples.empty()) {
    w.samples.assign(n, 0.0);
  } else if (w.size() > n) {
    w.samples.resize(n);
  } else {
    w.samples.resize(n, w.samples.back());
  }
  return w;
}

Waveform external_codec(const Waveform& w, const std::string& command_template) {
  validate(w);
  namespace fs = std::filesystem;
  static std::atomic<std::uint64_t> counter{0};
  const auto stamp = std::to_string(::getpid()) + "_" + std::to_string(counter.fetch_add(1));
  const fs::path dir = fs::temp_directory_path() / ("spoofprobe_codec_" + stamp);
  fs::create_directories(dir);
  const fs::path in = dir / "in.wav";
  const fs::path out = dir / "out.wav";
  write_wav(in, w);
  std::string cmd = replace_all(command_template, "{in}", "'" + in.string() + "'");
  cmd = replace_all(cmd, "{out}", "'" + out.string() + "'");
  const int rc = std::system(cmd.c_str());
  if (rc != 0) {
    fs::remove_all(dir);
    throw std::runtime_error("external codec command failed (" + std::to_string(rc) + "): " + cmd);
  }
  Waveform decoded;
  try {
    decoded = read_wav(out);
  } catch (...) {
    fs::remove_all(dir);
    throw;
  }
  fs::remove_all(dir);
  if (decoded.sample_rate_hz != w.sample_rate_hz) {
    throw std::runtime_error("external codec changed the sample rate");
  }
  return align_length(std::move(decoded), w.size());
}

InterventionDraw draw_parameters(const InterventionSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  InterventionDraw d;
  d.snr_db = rng.uniform(spec.snr_db.lo, spec.snr_db.hi);
  d.target_dbfs = rng.uniform(spec.target_dbfs.lo, spec.target_dbfs.hi);
  d.cutoff_hz = rng.uniform(spec.cutoff_hz.lo, spec.cutoff_hz.hi);
  d.bits = spec.bits.empty() ? 16 : spec.bits[rng.below(spec.bits.size())];
  d.noise_seed = rng.next_u64();
  return d;
}

Waveform apply_intervention(const Waveform& w, const InterventionSpec& spec, std::uint64_t seed) {
  validate(spec, w.sample_rate_hz);
  const InterventionDraw d = draw_parameters(spec, seed);
  switch (spec.type) {
    case InterventionType::noise:
      return add_white_noise(w, d.snr_db, d.noise_seed);
    case InterventionType::loudness:
      return normalize_loudness(w, d.target_dbfs).audio;
    case InterventionType::codec:
      if (!spec.external_command.empty()) return external_codec(w, spec.external_command);
      return codec_degrade(w, d.cutoff_hz, d.bits);
  }
  throw std::logic_error("unhandled intervention type");
}

}  // namespace spoofprobe
