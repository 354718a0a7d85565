#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "spoofprobe/interventions.hpp"
#include "spoofprobe/manifest.hpp"
#include "spoofprobe/synth.hpp"

namespace spoofprobe {

enum class BiasKind { none, silence_pad, loudness_offset };

std::string_view to_string(BiasKind kind);
BiasKind parse_bias_kind(std::string_view text);

// Injected label correlation used to validate shortcut detection.
struct BiasSpec {
  BiasKind kind = BiasKind::none;
  Label target = Label::bonafide;
  // Milliseconds of leading zeros (silence_pad) or a gain in dB
  // (loudness_offset).
  double magnitude = 0.0;
  // Fraction of target-class items that receive the bias.
  double correlation = 1.0;
};

void validate(const BiasSpec& bias);

struct CorpusSpec {
  int n_bonafide = 40;
  int n_spoof = 360;
  double train_fraction = 0.8;
  SynthParams synth;
  BiasSpec bias;
  std::uint64_t seed = 0;
};

void validate(const CorpusSpec& spec);

inline constexpr std::string_view kManifestFile = "manifest.jsonl";

// Synthesizes every item, writes out_dir/audio/<id>.wav and
// out_dir/manifest.jsonl. The split is stratified per class: the first
// round(train_fraction * n) items of each class train, the rest test.
Manifest generate_corpus(const CorpusSpec& spec, const std::filesystem::path& out_dir);

// Matrix configurations: original, or exactly one (phase, class) subset
// intervened.
enum class ConfigurationId { O, Tr_B, Tr_S, Te_B, Te_S };

inline constexpr ConfigurationId kAllConfigurations[] = {
    ConfigurationId::O, ConfigurationId::Tr_B, ConfigurationId::Tr_S, ConfigurationId::Te_B,
    ConfigurationId::Te_S};

std::string_view to_string(ConfigurationId id);
ConfigurationId parse_configuration(std::string_view text);

struct Subset {
  Phase phase;
  Label label;
  bool operator==(const Subset&) const = default;
};

// Which subsets an intervention touches. Beyond the five configurations, callers may ask for
// arbitrary subset combinations (e.g. the both-phases boundary case).
struct InterventionPlan {
  std::vector<Subset> subsets;
  bool covers(Phase phase, Label label) const;
};

InterventionPlan plan_for(ConfigurationId id);

struct ConfiguredSplit {
  Manifest train;
  Manifest test;
};

// Marks and materializes the planned subsets: intervened audio goes to
// out_dir/audio/<id>.wav, manifests to out_dir/{train,test}.jsonl.
// Throws std::invalid_argument if any of the four subsets is empty.
ConfiguredSplit build_configuration(ConfigurationId id, const Manifest& manifest,
                                    const InterventionSpec& spec, std::uint64_t seed,
                                    const std::filesystem::path& out_dir);

ConfiguredSplit build_plan(const InterventionPlan& plan, const Manifest& manifest,
                           const InterventionSpec& spec, std::uint64_t seed,
                           const std::filesystem::path& out_dir);

// Seed used for one item's intervention draw.
std::uint64_t item_intervention_seed(std::uint64_t run_seed, std::string_view item_id);

}  // namespace spoofprobe
