#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "spoofprobe/waveform.hpp"

namespace spoofprobe {

class WavError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// RIFF/WAVE, PCM format tag 1, one channel, 16-bit little-endian.
// Samples are scaled by 1/32768. Anything else raises WavError.
Waveform read_wav(const std::filesystem::path& path);
Waveform decode_wav(std::string_view bytes);

// Samples are clamped to [-1, 1] and rounded to the nearest 16-bit code
// (x * 32768, saturated to [-32768, 32767]).
void write_wav(const std::filesystem::path& path, const Waveform& w);
std::string encode_wav(const Waveform& w);

// Rounds samples to the 16-bit grid exactly as write_wav would, so an
// in-memory waveform can match its on-disk counterpart.
Waveform quantize_pcm16(const Waveform& w);

}  // namespace spoofprobe
