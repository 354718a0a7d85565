#include "spoofprobe/fir.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spoofprobe {
namespace {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double hann(int n, int taps) {
  return 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (n + 1) / (taps + 1));
}

void check_taps(int taps) {
  if (taps < 3 || taps % 2 == 0) throw std::invalid_argument("FIR tap count must be odd and >= 3");
}

}  // namespace

std::vector<double> design_lowpass(double cutoff_hz, double sample_rate_hz, int taps) {
  check_taps(taps);
  const double fc = cutoff_hz / sample_rate_hz;
  if (!(fc > 0.0 && fc < 0.5)) throw std::invalid_argument("cutoff must lie in (0, Nyquist)");
  const int mid = taps / 2;
  std::vector<double> h(taps);
  double sum = 0.0;
  for (int n = 0; n < taps; ++n) {
    h[n] = 2.0 * fc * sinc(2.0 * fc * (n - mid)) * hann(n, taps);
    sum += h[n];
  }
  for (double& v : h) v /= sum;
  return h;
}

std::vector<double> design_bandpass(double low_hz, double high_hz, double sample_rate_hz,
                                    int taps) {
  check_taps(taps);
  const double lo = low_hz / sample_rate_hz;
  const double hi = high_hz / sample_rate_hz;
  if (!(lo > 0.0 && lo < hi && hi < 0.5)) throw std::invalid_argument("invalid band edges");
  const int mid = taps / 2;
  const double center = 0.5 * (lo + hi);
  std::vector<double> h(taps);
  for (int n = 0; n < taps; ++n) {
    const double k = n - mid;
    h[n] = (2.0 * hi * sinc(2.0 * hi * k) - 2.0 * lo * sinc(2.0 * lo * k)) * hann(n, taps);
  }
  // Unity gain at the center frequency.
  double re = 0.0, im = 0.0;
  for (int n = 0; n < taps; ++n) {
    const double a = 2.0 * std::numbers::pi * center * (n - mid);
    re += h[n] * std::cos(a);
    im += h[n] * std::sin(a);
  }
  const double gain = std::hypot(re, im);
  for (double& v : h) v /= gain;
  return h;
}

std::vector<double> filter_aligned(std::span<const double> x, std::span<const double> taps) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(taps.size());
  const std::ptrdiff_t delay = m / 2;
  std::vector<double> y(x.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    // y[i] = sum_k h[k] * x[i + delay - k]
    const std::ptrdiff_t k_lo = std::max<std::ptrdiff_t>(0, i + delay - (n - 1));
    const std::ptrdiff_t k_hi = std::min<std::ptrdiff_t>(m - 1, i + delay);
    double acc = 0.0;
    for (std::ptrdiff_t k = k_lo; k <= k_hi; ++k) acc += taps[k] * x[i + delay - k];
    y[i] = acc;
  }
  return y;
}

}  // namespace spoofprobe
