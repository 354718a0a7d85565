#pragma once

#include <span>
#include <vector>

namespace spoofprobe {

// Hann-windowed sinc low-pass, odd tap count, unity DC gain.
// cutoff_hz is the -6 dB point.
std::vector<double> design_lowpass(double cutoff_hz, double sample_rate_hz, int taps);

// Hann-windowed sinc band-pass with unity gain at the band center.
std::vector<double> design_bandpass(double low_hz, double high_hz, double sample_rate_hz,
                                    int taps);

// Linear-phase filtering with the (taps-1)/2 group delay removed, so
// output[i] lines up with input[i]. Zero padding at both ends.
std::vector<double> filter_aligned(std::span<const double> x, std::span<const double> taps);

}  // namespace spoofprobe
