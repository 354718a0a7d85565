#include "spoofprobe/manifest.hpp"

#include <nlohmann/json.hpp>

#include <sstream>
#include <stdexcept>

#include "spoofprobe/hash.hpp"

namespace spoofprobe {

namespace fs = std::filesystem;

std::string_view to_string(Phase phase) { return phase == Phase::train ? "train" : "test"; }

Phase parse_phase(std::string_view text) {
  if (text == "train") return Phase::train;
  if (text == "test") return Phase::test;
  throw std::invalid_argument("unknown phase '" + std::string(text) + "'");
}

void Manifest::add(ManifestEntry entry) {
  if (entry.id.empty()) throw std::invalid_argument("manifest entry id is empty");
  const auto [it, inserted] = index_.emplace(entry.id, entries_.size());
  if (!inserted) throw std::invalid_argument("duplicate manifest id '" + entry.id + "'");
  entries_.push_back(std::move(entry));
}

const ManifestEntry& Manifest::at(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) throw std::out_of_range("no manifest entry '" + std::string(id) + "'");
  return entries_[it->second];
}

std::size_t Manifest::count(Phase phase, Label label) const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += (e.phase == phase && e.label == label) ? 1 : 0;
  return n;
}

Manifest Manifest::filter(Phase phase) const {
  Manifest m;
  for (const auto& e : entries_) {
    if (e.phase == phase) m.add(e);
  }
  return m;
}

std::string Manifest::to_jsonl(const fs::path& base_dir) const {
  const fs::path base = fs::absolute(base_dir).lexically_normal();
  std::string out;
  for (const auto& e : entries_) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["audio_path"] = e.audio_path.lexically_relative(base).generic_string();
    j["label"] = to_string(e.label);
    j["phase"] = to_string(e.phase);
    j["intervened"] = e.intervened;
    out += j.dump();
    out += '\n';
  }
  return out;
}

Manifest Manifest::from_jsonl(std::string_view text, const fs::path& base_dir) {
  const fs::path base = fs::absolute(base_dir).lexically_normal();
  Manifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ManifestEntry e;
      e.id = j.at("id").get<std::string>();
      const fs::path p = j.at("audio_path").get<std::string>();
      e.audio_path = (p.is_absolute() ? p : base / p).lexically_normal();
      e.label = parse_label(j.at("label").get<std::string>());
      e.phase = parse_phase(j.at("phase").get<std::string>());
      e.intervened = j.at("intervened").get<bool>();
      m.add(std::move(e));
    } catch (const std::exception& ex) {
      throw std::runtime_error("manifest line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return m;
}

void Manifest::save(const fs::path& file) const {
  write_file(file, to_jsonl(file.parent_path().empty() ? fs::path(".") : file.parent_path()));
}

Manifest Manifest::load(const fs::path& file) {
  return from_jsonl(read_file(file), file.parent_path().empty() ? fs::path(".") : file.parent_path());
}

}  // namespace spoofprobe
