#pragma once

#include <complex>
#include <span>
#include <vector>

namespace spoofprobe {

// In-place iterative radix-2 FFT. Size must be a power of two.
// A fixed butterfly order keeps results bit-identical across machines.
void fft_inplace(std::span<std::complex<double>> data);

// Power spectrum |X[k]|^2 for k in [0, n/2] of a real frame of length n.
std::vector<double> power_spectrum(std::span<const double> frame);

constexpr bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace spoofprobe
