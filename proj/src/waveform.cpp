#include "spoofprobe/waveform.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace spoofprobe {

std::string_view to_string(Label label) {
  return label == Label::bonafide ? "bonafide" : "spoof";
}

Label parse_label(std::string_view text) {
  if (text == "bonafide") return Label::bonafide;
  if (text == "spoof") return Label::spoof;
  throw std::invalid_argument("unknown label '" + std::string(text) + "'");
}

void validate(const Waveform& w) {
  if (w.sample_rate_hz <= 0) throw std::invalid_argument("sample rate must be positive");
  if (w.samples.empty()) throw std::invalid_argument("waveform is empty");
  for (double s : w.samples) {
    if (!std::isfinite(s)) throw std::invalid_argument("waveform contains non-finite samples");
  }
}

double mean_square(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

double rms_dbfs(const Waveform& w) {
  const double ms = mean_square(w.samples);
  if (ms == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ms);
}

std::size_t clamp_unit(std::vector<double>& samples) {
  std::size_t clipped = 0;
  for (double& s : samples) {
    if (s > 1.0) {
      s = 1.0;
      ++clipped;
    } else if (s < -1.0) {
      s = -1.0;
      ++clipped;
    }
  }
  return clipped;
}

}  // namespace spoofprobe
