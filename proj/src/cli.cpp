#include "spoofprobe/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <ostream>

#include "spoofprobe/experiment.hpp"
#include "spoofprobe/hash.hpp"
#include "spoofprobe/rng.hpp"
#include "spoofprobe/wav_io.hpp"

namespace spoofprobe {

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kRuntime = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

ExperimentConfig require_config(const Globals& g, bool need_out) {
  if (g.config.empty()) throw UsageError("--config is required");
  ExperimentConfig cfg = load_config(g.config, g.seed);
  if (!g.out.empty()) cfg.output_dir = g.out;
  if (need_out && cfg.output_dir.empty()) throw UsageError("--out is required");
  return cfg;
}

const InterventionSpec& spec_for(const ExperimentConfig& cfg, const std::string& kind) {
  if (kind.empty()) return cfg.interventions.front();
  const InterventionType t = parse_intervention(kind);
  for (const auto& spec : cfg.interventions) {
    if (spec.type == t) return spec;
  }
  throw UsageError(fmt::format("intervention '{}' is not configured", kind));
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Class-wise bias and shortcut probe for spoofing countermeasures", "spoofprobe"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Experiment config file");
  app.add_option("--seed", g.seed, "Run seed (overrides [run] seed)");
  app.add_option("--out", g.out, "Output directory");

  auto* gen = app.add_subcommand("gen-data", "Synthesize the corpus (with trimming) under --out");

  auto* intervene = app.add_subcommand("intervene", "Materialize one configuration's manifests and audio");
  std::string configuration = "O";
  std::string kind;
  std::string manifest_path;
  intervene->add_option("--configuration", configuration, "O, Tr_B, Tr_S, Te_B or Te_S");
  intervene->add_option("--kind", kind, "Intervention kind (default: first configured)");
  intervene->add_option("--manifest", manifest_path, "Corpus manifest (default: generate one)");

  auto* trim = app.add_subcommand("trim", "Trim silence from WAV files into --out");
  std::vector<std::string> wavs;
  trim->add_option("inputs", wavs, "Input WAV files")->required();

  auto* train_cmd = app.add_subcommand("train", "Train on a manifest's train phase");
  std::string train_manifest;
  train_cmd->add_option("--manifest", train_manifest, "Training manifest")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score a manifest and print its EER");
  std::string checkpoint;
  std::string eval_manifest;
  evaluate->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  evaluate->add_option("--manifest", eval_manifest, "Manifest to score")->required();

  auto* matrix = app.add_subcommand("run-matrix", "Run the five-configuration matrix");
  auto* compare = app.add_subcommand("loss-compare", "Train one model per loss on configuration O");

  auto* report = app.add_subcommand("report", "Render a report.json");
  std::string report_path;
  std::string format = "csv";
  report->add_option("report", report_path, "report.json")->required();
  report->add_option("--format", format, "csv, train-csv or json")
      ->check(CLI::IsMember({"csv", "train-csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (gen->parsed()) {
      const ExperimentConfig cfg = require_config(g, true);
      const fs::path dir = cfg.output_dir;
      const Manifest m = prepare_corpus(cfg, dir);
      out << fmt::format("{} items\n", m.size());
    } else if (intervene->parsed()) {
      const ExperimentConfig cfg = require_config(g, true);
      const fs::path dir = cfg.output_dir;
      const ConfigurationId id = parse_configuration(configuration);
      const Manifest m = manifest_path.empty() ? prepare_corpus(cfg, dir / "corpus") : Manifest::load(manifest_path);
      const ConfiguredSplit split =
          build_configuration(id, m, spec_for(cfg, kind), derive_seed(*cfg.seed, "interventions"), dir);
      out << fmt::format("train {} items, test {} items\n", split.train.size(), split.test.size());
    } else if (trim->parsed()) {
      const ExperimentConfig cfg = require_config(g, true);
      const fs::path dir = cfg.output_dir;
      fs::create_directories(dir);
      for (const auto& in : wavs) {
        const TrimResult r = trim_silence(read_wav(in), cfg.vad);
        write_wav(dir / fs::path(in).filename(), r.audio);
        out << fmt::format("{}: removed {} samples{}\n", in, r.removed_samples,
                           r.fully_silent ? " (fully silent)" : "");
      }
    } else if (train_cmd->parsed()) {
      const ExperimentConfig cfg = require_config(g, true);
      const fs::path dir = cfg.output_dir;
      const Manifest m = Manifest::load(train_manifest).filter(Phase::train);
      const TrainResult r = train(m, cfg.train);
      save_checkpoint(dir / "model.json", r.params);
      write_file(dir / "telemetry.csv", to_csv(r.telemetry));
      out << fmt::format("checkpoint {}\n", (dir / "model.json").string());
    } else if (evaluate->parsed()) {
      const ModelParams p = load_checkpoint(checkpoint);
      const EerResult r = compute_eer(score_manifest(p, Manifest::load(eval_manifest)));
      out << fmt::format("EER: {}%\n", format_percent(r.eer));
    } else if (matrix->parsed()) {
      const ExperimentReport r = run_matrix(require_config(g, true));
      out << to_csv(r);
    } else if (compare->parsed()) {
      const ExperimentConfig cfg = require_config(g, true);
      for (const auto& row : run_loss_comparison(cfg, loss_suite(cfg))) {
        out << fmt::format("{}: EER {}%\n", to_string(row.loss), format_percent(row.eer));
      }
    } else if (report->parsed()) {
      const ExperimentReport r = report_from_json(read_file(report_path));
      if (format == "csv") out << to_csv(r);
      else if (format == "train-csv") out << to_train_csv(r);
      else out << to_json(r);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}

}  // namespace spoofprobe
