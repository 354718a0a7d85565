#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spoofprobe/corpus.hpp"
#include "spoofprobe/interventions.hpp"
#include "spoofprobe/report.hpp"
#include "spoofprobe/train.hpp"
#include "spoofprobe/vad.hpp"

namespace spoofprobe {

enum class TrimPhase { none, train, test, train_and_test };

std::string_view to_string(TrimPhase phase);
TrimPhase parse_trim_phase(std::string_view text);
bool trims(TrimPhase trim, Phase phase);

struct ExperimentConfig {
  std::optional<std::uint64_t> seed;
  CorpusSpec corpus;
  std::vector<InterventionSpec> interventions{InterventionSpec{}};
  TrimPhase trim = TrimPhase::none;
  VadConfig vad;
  TrainConfig train;
  // Losses for loss-compare; empty means all five.
  std::vector<LossKind> loss_suite;
  // Extra rows beyond the five configurations, both evaluated with the Tr_<class> model:
  // Both_<c> tests on the Te_<c> set, Flip_<other> on the Te_<other> set.
  bool both_phases = false;
  bool label_flip = false;
  Label extras_class = Label::bonafide;
  std::filesystem::path output_dir;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sectioned key = value text; see docs/config.md. Unknown sections or keys,
// malformed values and a missing seed raise ConfigError.
ExperimentConfig parse_config(std::string_view text,
                              std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& file,
                             std::optional<std::uint64_t> seed_override = std::nullopt);

// Fills corpus/train seeds from the run seed. Throws ConfigError if unset.
void finalize(ExperimentConfig& cfg);

// Generates the corpus under out, applying the trim phase, and returns the
// manifest every configuration is derived from.
Manifest prepare_corpus(const ExperimentConfig& cfg, const std::filesystem::path& out);

// Scores every item of the manifest; EER over the result.
ScoreSet score_manifest(const ModelParams& p, const Manifest& manifest);

// Runs O, Tr_B, Tr_S, Te_B, Te_S for every configured intervention (plus the
// optional extra rows), writing under cfg.output_dir:
//   report.json, report.csv, report_train.csv, models/, telemetry/,
//   corpus/, configs/, outputs.json, and trim_audit.jsonl when trimming.
// On failure a FAILED marker and report_partial.json are written and the
// exception is rethrown.
ExperimentReport run_matrix(const ExperimentConfig& cfg);

struct LossComparisonRow {
  LossKind loss = LossKind::cce;
  double eer = 0.0;
  std::string telemetry;
  LossTelemetry curves;
};

// One model per loss on configuration O; writes loss_comparison.csv and a
// telemetry file per loss under cfg.output_dir.
std::vector<LossComparisonRow> run_loss_comparison(const ExperimentConfig& cfg,
                                                   const std::vector<LossSpec>& losses);

// Loss specs for the suite: the configured [loss] section with only the kind
// changed.
std::vector<LossSpec> loss_suite(const ExperimentConfig& cfg);

}  // namespace spoofprobe
