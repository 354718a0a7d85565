#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "spoofprobe/interventions.hpp"
#include "spoofprobe/rng.hpp"
#include "spoofprobe/synth.hpp"
#include "spoofprobe/wav_io.hpp"
#include "support.hpp"

using namespace spoofprobe;
using namespace testsupport;

namespace {

double power(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

Waveform voice(std::uint64_t seed = 3) { return synth_utterance(SynthParams{}, Label::bonafide, seed); }

}  // namespace

TEST_SUITE("interventions") {

TEST_CASE("white noise hits the requested SNR") {
  const Waveform w = voice();
  for (double snr : {10.0, 20.0, 35.0}) {
    const Waveform y = add_white_noise(w, snr, 99);
    std::vector<double> d(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) d[i] = y.samples[i] - w.samples[i];
    const double measured = 10.0 * std::log10(power(w.samples) / power(d));
    CHECK(std::abs(measured - snr) < 0.1);
  }
}

TEST_CASE("white noise sentinel, determinism and errors") {
  const Waveform w = voice();
  CHECK(add_white_noise(w, kNoNoise, 1) == w);
  CHECK(add_white_noise(w, 20.0, 5) == add_white_noise(w, 20.0, 5));
  CHECK(add_white_noise(w, 20.0, 5) != add_white_noise(w, 20.0, 6));
  CHECK_THROWS_AS(add_white_noise(zeros(0.1), 20.0, 1), std::invalid_argument);
  // Loud input at low SNR still ends up inside [-1, 1].
  const Waveform loud = tone(200.0, 0.2, 0.99);
  for (double s : add_white_noise(loud, 0.0, 2).samples) CHECK(std::abs(s) <= 1.0);
}

TEST_CASE("loudness normalization reaches target and reports clipping") {
  const Waveform w = voice();
  const LoudnessResult r = normalize_loudness(w, -26.0);
  CHECK(r.clipped == 0);
  CHECK(std::abs(rms_dbfs(r.audio) - (-26.0)) < 0.01);

  const LoudnessResult same = normalize_loudness(w, rms_dbfs(w));
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(same.audio.samples[i] - w.samples[i]) < 1e-9);

  const Waveform hot = tone(200.0, 0.2, 0.95);
  const LoudnessResult clipped = normalize_loudness(hot, -1.0);
  CHECK(clipped.clipped > 0);
  for (double s : clipped.audio.samples) CHECK(std::abs(s) <= 1.0);
  CHECK_THROWS_AS(normalize_loudness(zeros(0.1), -20.0), std::invalid_argument);
}

TEST_CASE("codec surrogate attenuates tones above cutoff by 40 dB") {
  const Waveform in = tone(6000.0, 0.5, 0.5);
  const Waveform out = codec_degrade(in, 3000.0, 16);
  CHECK(out.size() == in.size());
  const double before = tone_magnitude(in.samples, 16000, 6000.0);
  const double after = tone_magnitude(out.samples, 16000, 6000.0);
  CHECK(20.0 * std::log10(before / after) >= 40.0);
  // A tone well inside the passband keeps its level.
  const Waveform low = tone(500.0, 0.5, 0.5);
  const Waveform low_out = codec_degrade(low, 3000.0, 16);
  CHECK(std::abs(20.0 * std::log10(tone_magnitude(low_out.samples, 16000, 500.0) /
                                   tone_magnitude(low.samples, 16000, 500.0))) < 0.1);
}

TEST_CASE("codec near-identity settings and coarse quantization") {
  // Band-limited, faded input: the 255-tap transition band sits just below
  // Nyquist, so broadband content there (breath noise) is legitimately removed.
  Waveform w = tone(220.0, 1.0, 0.2);
  const Waveform extra[] = {tone(1330.0, 1.0, 0.15, 16000, 1.0), tone(3100.0, 1.0, 0.1, 16000, 2.0),
                            tone(5900.0, 1.0, 0.05, 16000, 0.5)};
  for (const auto& e : extra) {
    for (std::size_t i = 0; i < w.size(); ++i) w.samples[i] += e.samples[i];
  }
  const std::size_t fade = 800;
  for (std::size_t i = 0; i < fade; ++i) {
    const double g = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / fade);
    w.samples[i] *= g;
    w.samples[w.size() - 1 - i] *= g;
  }
  const Waveform y = codec_degrade(w, 8000.0 * 0.999, 16);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(y.samples[i] - w.samples[i]) <= std::ldexp(1.0, -15));

  const Waveform dc_free = tone(300.0, 0.3, 0.8);
  const Waveform two = codec_degrade(dc_free, 4000.0, 2);
  std::set<double> levels(two.samples.begin(), two.samples.end());
  CHECK(levels.size() <= 4);
  CHECK(levels.size() >= 2);

  CHECK_THROWS_AS(codec_degrade(w, 0.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(codec_degrade(w, 8000.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(codec_degrade(w, 3000.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(codec_degrade(w, 3000.0, 17), std::invalid_argument);
}

TEST_CASE("collapsed SNR range delegates to add_white_noise") {
  const Waveform w = voice();
  InterventionSpec spec;
  spec.type = InterventionType::noise;
  spec.snr_db = {20.0, 20.0};
  const InterventionDraw d = draw_parameters(spec, 77);
  CHECK(d.snr_db == 20.0);
  CHECK(apply_intervention(w, spec, 77) == add_white_noise(w, 20.0, d.noise_seed));
  CHECK(apply_intervention(w, spec, 77) == apply_intervention(w, spec, 77));
}

TEST_CASE("parameter draws cover the configured ranges uniformly") {
  InterventionSpec spec;
  double lo = 1e9, hi = -1e9, sum = 0.0;
  std::set<int> bits;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const InterventionDraw d = draw_parameters(spec, derive_seed(123, i));
    lo = std::min(lo, d.snr_db);
    hi = std::max(hi, d.snr_db);
    sum += d.snr_db;
    bits.insert(d.bits);
    CHECK(d.target_dbfs >= -30.0);
    CHECK(d.target_dbfs <= -20.0);
    CHECK(d.cutoff_hz >= 3000.0);
    CHECK(d.cutoff_hz <= 7000.0);
  }
  CHECK(lo >= 10.0);
  CHECK(hi <= 40.0);
  CHECK(std::abs(sum / 1000.0 - 25.0) < 1.0);
  CHECK(bits == std::set<int>{8, 10, 12});
}

TEST_CASE("every intervention preserves length and rate") {
  const Waveform w = voice();
  for (InterventionType t : {InterventionType::noise, InterventionType::loudness, InterventionType::codec}) {
    InterventionSpec spec;
    spec.type = t;
    const Waveform y = apply_intervention(w, spec, 4);
    CHECK(y.size() == w.size());
    CHECK(y.sample_rate_hz == w.sample_rate_hz);
    CHECK(y != w);
    for (double s : y.samples) CHECK(std::abs(s) <= 1.0);
  }
}

TEST_CASE("InterventionSpec validation") {
  InterventionSpec spec;
  spec.snr_db = {30.0, 10.0};
  CHECK_THROWS_AS(validate(spec, 16000), std::invalid_argument);
  spec = InterventionSpec{};
  spec.snr_db = {10.0, 70.0};
  CHECK_THROWS_AS(validate(spec, 16000), std::invalid_argument);
  spec = InterventionSpec{};
  spec.cutoff_hz = {3000.0, 8000.0};
  CHECK_THROWS_AS(validate(spec, 16000), std::invalid_argument);
  spec = InterventionSpec{};
  spec.bits = {};
  CHECK_THROWS_AS(validate(spec, 16000), std::invalid_argument);
  CHECK_NOTHROW(validate(InterventionSpec{}, 16000));
  CHECK(parse_intervention("mp3") == InterventionType::codec);
  CHECK_THROWS_AS(parse_intervention("reverb"), std::invalid_argument);
}

TEST_CASE("align_length truncates or pads with the last sample") {
  Waveform w{{0.1, 0.2, 0.3}};
  CHECK(align_length(w, 2).samples == std::vector<double>{0.1, 0.2});
  CHECK(align_length(w, 5).samples == std::vector<double>{0.1, 0.2, 0.3, 0.3, 0.3});
}

TEST_CASE("external codec hook round-trips through files") {
  const Waveform w = quantize_pcm16(tone(300.0, 0.1, 0.5));
  const Waveform y = external_codec(w, "cp {in} {out}");
  CHECK(y == w);
  CHECK_THROWS(external_codec(w, "false"));
}

}  // TEST_SUITE
