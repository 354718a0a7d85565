#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "spoofprobe/waveform.hpp"

namespace spoofprobe {

enum class Phase { train, test };

std::string_view to_string(Phase phase);
Phase parse_phase(std::string_view text);

struct ManifestEntry {
  std::string id;
  // Absolute while in memory; written relative to the manifest file.
  std::filesystem::path audio_path;
  Label label = Label::bonafide;
  Phase phase = Phase::train;
  bool intervened = false;

  bool operator==(const ManifestEntry&) const = default;
};

class Manifest {
 public:
  Manifest() = default;

  // Throws std::invalid_argument on a duplicate id.
  void add(ManifestEntry entry);

  const std::vector<ManifestEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const ManifestEntry& at(std::string_view id) const;

  std::size_t count(Phase phase, Label label) const;
  Manifest filter(Phase phase) const;

  // JSON lines, keys in the order id, audio_path, label, phase, intervened.
  std::string to_jsonl(const std::filesystem::path& base_dir) const;
  static Manifest from_jsonl(std::string_view text, const std::filesystem::path& base_dir);

  void save(const std::filesystem::path& file) const;
  static Manifest load(const std::filesystem::path& file);

  bool operator==(const Manifest& other) const { return entries_ == other.entries_; }

 private:
  std::vector<ManifestEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace spoofprobe
