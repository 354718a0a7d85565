#include "spoofprobe/wav_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>

#include "spoofprobe/hash.hpp"

namespace spoofprobe {
namespace {

std::uint32_t read_u32(std::string_view b, std::size_t at) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3])) << 24;
}

std::uint16_t read_u16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    static_cast<unsigned char>(b[at + 1]) << 8);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

std::int16_t to_pcm16(double s) {
  const double scaled = std::nearbyint(s * 32768.0);
  if (scaled > 32767.0) return 32767;
  if (scaled < -32768.0) return -32768;
  return static_cast<std::int16_t>(scaled);
}

}  // namespace

Waveform decode_wav(std::string_view b) {
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE") {
    throw WavError("not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::string_view id = b.substr(pos, 4);
    const std::uint32_t size = read_u32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > b.size() && id != "data") throw WavError("truncated chunk");
    if (id == "fmt ") {
      if (size < 16) throw WavError("fmt chunk too short");
      const std::uint16_t format = read_u16(b, body);
      channels = read_u16(b, body + 2);
      rate = read_u32(b, body + 4);
      bits = read_u16(b, body + 14);
      if (format != 1) {
        throw WavError("unsupported WAV encoding (format tag " + std::to_string(format) +
                       "); only 16-bit PCM is accepted");
      }
      if (channels != 1) {
        throw WavError("unsupported channel count " + std::to_string(channels) +
                       "; only mono is accepted");
      }
      if (bits != 16) {
        throw WavError("unsupported sample width of " + std::to_string(bits) +
                       " bits; only 16-bit PCM is accepted");
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw WavError("data chunk before fmt chunk");
      const std::size_t avail = std::min<std::size_t>(size, b.size() - body);
      const std::size_t n = avail / 2;
      if (n == 0) throw WavError("WAV file has no samples");
      Waveform w;
      w.sample_rate_hz = static_cast<int>(rate);
      w.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto code = static_cast<std::int16_t>(read_u16(b, body + 2 * i));
        w.samples[i] = static_cast<double>(code) / 32768.0;
      }
      return w;
    }
    pos = body + size + (size & 1);
  }
  throw WavError(have_fmt ? "missing data chunk" : "missing fmt chunk");
}

Waveform read_wav(const std::filesystem::path& path) {
  try {
    return decode_wav(read_file(path));
  } catch (const WavError& e) {
    throw WavError(path.string() + ": " + e.what());
  }
}

std::string encode_wav(const Waveform& w) {
  const auto n = static_cast<std::uint32_t>(w.samples.size());
  const std::uint32_t data_bytes = 2 * n;
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate_hz));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate_hz) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (double s : w.samples) put_u16(out, static_cast<std::uint16_t>(to_pcm16(s)));
  return out;
}

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  write_file(path, encode_wav(w));
}

Waveform quantize_pcm16(const Waveform& w) {
  Waveform q{std::vector<double>(w.samples.size()), w.sample_rate_hz};
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    q.samples[i] = static_cast<double>(to_pcm16(w.samples[i])) / 32768.0;
  }
  return q;
}

}  // namespace spoofprobe
