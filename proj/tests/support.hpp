#pragma once

// Shared fixtures and reference oracles. Oracles are deliberately written
// from first principles (direct sums, exhaustive sweeps) without calling the
// library routine they check.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "spoofprobe/waveform.hpp"

namespace testsupport {

namespace fs = std::filesystem;

// Removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("spoofprobe_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

inline spoofprobe::Waveform tone(double freq_hz, double seconds, double amplitude = 0.5, int fs = 16000,
                                 double phase = 0.0) {
  spoofprobe::Waveform w;
  w.sample_rate_hz = fs;
  const auto n = static_cast<std::size_t>(std::llround(seconds * fs));
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / fs + phase);
  }
  return w;
}

inline spoofprobe::Waveform zeros(double seconds, int fs = 16000) {
  spoofprobe::Waveform w;
  w.sample_rate_hz = fs;
  w.samples.assign(static_cast<std::size_t>(std::llround(seconds * fs)), 0.0);
  return w;
}

inline spoofprobe::Waveform concat(std::initializer_list<spoofprobe::Waveform> parts) {
  spoofprobe::Waveform out;
  out.sample_rate_hz = parts.begin()->sample_rate_hz;
  for (const auto& p : parts) out.samples.insert(out.samples.end(), p.samples.begin(), p.samples.end());
  return out;
}

// Mean DFT magnitude over the bins whose frequency lies in [lo, hi] Hz,
// computed by direct summation.
inline double band_mean_magnitude(const std::vector<double>& x, int fs, double lo, double hi) {
  const std::size_t n = x.size();
  double total = 0.0;
  std::size_t bins = 0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    if (f < lo || f > hi) continue;
    std::complex<double> acc{0.0, 0.0};
    const double w = -2.0 * std::numbers::pi / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Reduce the phase index modulo n to keep the argument small.
      const double ang = w * static_cast<double>((k * i) % n);
      acc += x[i] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    total += std::abs(acc);
    ++bins;
  }
  return bins ? total / static_cast<double>(bins) : 0.0;
}

// Magnitude of a single-frequency correlation (tone detector).
inline double tone_magnitude(const std::vector<double>& x, int fs, double freq) {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ang = -2.0 * std::numbers::pi * freq * static_cast<double>(i) / fs;
    acc += x[i] * std::complex<double>(std::cos(ang), std::sin(ang));
  }
  return std::abs(acc);
}

// Reference trimmer: walks frames of frame_len advanced by shift, marks a
// sample as speech if any frame at or above the threshold covers it (tail
// samples follow the last frame), then drops non-speech runs longer than
// max_keep samples. Single pass.
struct FrameWalk {
  std::vector<double> kept;
  std::vector<std::size_t> kept_index;
  bool any_speech = false;
};

inline FrameWalk frame_walk_trim(const std::vector<double>& x, std::size_t frame_len, std::size_t shift,
                                 double rel_db, double floor_db, std::size_t max_keep) {
  const std::size_t count = (x.size() - frame_len) / shift + 1;
  std::vector<double> energy_db(count);
  double mean_lin = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < frame_len; ++i) s += x[k * shift + i] * x[k * shift + i];
    const double ms = s / static_cast<double>(frame_len);
    energy_db[k] = 10.0 * std::log10(ms + 1e-12);
    mean_lin += ms + 1e-12;
  }
  mean_lin /= static_cast<double>(count);
  const double thr = std::max(10.0 * std::log10(mean_lin) + rel_db, floor_db);

  std::vector<char> speech(x.size(), 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t s = k * shift;
      const bool covers = (i >= s && i < s + frame_len) || (k == count - 1 && i >= s);
      if (covers && energy_db[k] >= thr) {
        speech[i] = 1;
        break;
      }
    }
  }
  FrameWalk out;
  for (std::size_t i = 0; i < x.size();) {
    std::size_t j = i;
    while (j < x.size() && speech[j] == speech[i]) ++j;
    if (speech[i]) out.any_speech = true;
    if (speech[i] || j - i <= max_keep) {
      for (std::size_t t = i; t < j; ++t) {
        out.kept.push_back(x[t]);
        out.kept_index.push_back(t);
      }
    }
    i = j;
  }
  return out;
}

// Exhaustive EER oracle over the operating points {-inf, scores..., +inf}
// with FRR = #(bona < t)/nb and FAR = #(spoof >= t)/ns, linear interpolation
// at the first sign change of FAR - FRR.
inline double brute_force_eer(const std::vector<double>& bona, const std::vector<double>& spoof) {
  std::vector<double> ts{-std::numeric_limits<double>::infinity()};
  for (double s : bona) ts.push_back(s);
  for (double s : spoof) ts.push_back(s);
  ts.push_back(std::numeric_limits<double>::infinity());
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  std::vector<double> frr, far;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    double a = 0.0, b = 0.0;
    const bool top = k + 1 == ts.size();
    for (double s : bona) a += (top || s < ts[k]) ? 1.0 : 0.0;
    for (double s : spoof) b += (!top && s >= ts[k]) ? 1.0 : 0.0;
    frr.push_back(a / static_cast<double>(bona.size()));
    far.push_back(b / static_cast<double>(spoof.size()));
  }
  for (std::size_t k = 1; k < ts.size(); ++k) {
    const double d0 = far[k - 1] - frr[k - 1];
    const double d1 = far[k] - frr[k];
    if (d0 > 0.0 && d1 <= 0.0) {
      const double lam = d0 / (d0 - d1);
      return frr[k - 1] + lam * (frr[k] - frr[k - 1]);
    }
  }
  return frr.front();
}

}  // namespace testsupport
