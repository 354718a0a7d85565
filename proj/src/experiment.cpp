#include "spoofprobe/experiment.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "spoofprobe/hash.hpp"
#include "spoofprobe/parallel.hpp"
#include "spoofprobe/rng.hpp"
#include "spoofprobe/wav_io.hpp"

namespace spoofprobe {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;
using ojson = nlohmann::ordered_json;

std::string_view to_string(TrimPhase phase) {
  switch (phase) {
    case TrimPhase::none: return "none";
    case TrimPhase::train: return "train";
    case TrimPhase::test: return "test";
    case TrimPhase::train_and_test: return "train_and_test";
  }
  return "none";
}

TrimPhase parse_trim_phase(std::string_view text) {
  for (TrimPhase p : {TrimPhase::none, TrimPhase::train, TrimPhase::test, TrimPhase::train_and_test}) {
    if (to_string(p) == text) return p;
  }
  throw std::invalid_argument(fmt::format("unknown trim phase '{}'", text));
}

bool trims(TrimPhase trim, Phase phase) {
  switch (trim) {
    case TrimPhase::none: return false;
    case TrimPhase::train: return phase == Phase::train;
    case TrimPhase::test: return phase == Phase::test;
    case TrimPhase::train_and_test: return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

std::string trim_ws(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim_ws(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& text, const std::string& where) {
  T value{};
  const char* b = text.data();
  const char* e = b + text.size();
  if (b != e && *b == '+') ++b;
  const auto [ptr, ec] = std::from_chars(b, e, value);
  if (ec != std::errc() || ptr != e || text.empty()) {
    throw ConfigError(fmt::format("{}: invalid number '{}'", where, text));
  }
  return value;
}

bool parse_bool(const std::string& text, const std::string& where) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(fmt::format("{}: invalid boolean '{}'", where, text));
}

// One INI section; every key must be consumed exactly once.
class Section {
 public:
  Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

  std::optional<std::string> raw(const std::string& key) {
    known_.insert(key);
    if (!tree_) return std::nullopt;
    const auto it = tree_->find(key);
    if (it == tree_->not_found()) return std::nullopt;
    return trim_ws(it->second.data());
  }

  template <typename T>
  void number(const std::string& key, T& target) {
    if (auto v = raw(key)) target = parse_number<T>(*v, where(key));
  }

  void boolean(const std::string& key, bool& target) {
    if (auto v = raw(key)) target = parse_bool(*v, where(key));
  }

  void text(const std::string& key, std::string& target) {
    if (auto v = raw(key)) target = *v;
  }

  void range(const std::string& key, Range& target) {
    if (auto v = raw(key)) {
      const auto parts = split_list(*v);
      if (parts.size() != 2) throw ConfigError(fmt::format("{}: expected 'lo, hi'", where(key)));
      target = {parse_number<double>(parts[0], where(key)), parse_number<double>(parts[1], where(key))};
    }
  }

  template <typename T>
  void list(const std::string& key, std::vector<T>& target) {
    if (auto v = raw(key)) {
      target.clear();
      for (const auto& part : split_list(*v)) target.push_back(parse_number<T>(part, where(key)));
    }
  }

  template <typename F>
  void enumerated(const std::string& key, F&& assign) {
    if (auto v = raw(key)) {
      try {
        assign(*v);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("{}: {}", where(key), e.what()));
      }
    }
  }

  void reject_unknown() const {
    if (!tree_) return;
    for (const auto& [key, value] : *tree_) {
      if (!known_.count(key)) throw ConfigError(fmt::format("unknown key '{}' in section [{}]", key, name_));
    }
  }

 private:
  std::string where(const std::string& key) const { return fmt::format("[{}] {}", name_, key); }

  std::string name_;
  const pt::ptree* tree_;
  std::set<std::string> known_;
};

}  // namespace

ExperimentConfig parse_config(std::string_view text, std::optional<std::uint64_t> seed_override) {
  pt::ptree root;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config syntax error at line {}: {}", e.line(), e.message()));
  }

  static const std::set<std::string> kSections = {"run",   "corpus", "synth",    "bias", "intervention",
                                                  "trim",  "features", "model",  "train", "loss",
                                                  "matrix"};
  for (const auto& [name, sub] : root) {
    if (!kSections.count(name)) throw ConfigError(fmt::format("unknown section [{}]", name));
    if (!sub.data().empty()) throw ConfigError(fmt::format("key '{}' outside any section", name));
  }
  auto section = [&](const std::string& name) {
    const auto it = root.find(name);
    return Section(name, it == root.not_found() ? nullptr : &it->second);
  };

  ExperimentConfig cfg;
  std::vector<Section> sections;

  {
    Section s = section("run");
    if (auto v = s.raw("seed")) cfg.seed = parse_number<std::uint64_t>(*v, "[run] seed");
    std::string out;
    s.text("output_dir", out);
    if (!out.empty()) cfg.output_dir = out;
    sections.push_back(std::move(s));
  }
  {
    Section s = section("corpus");
    s.number("n_bonafide", cfg.corpus.n_bonafide);
    s.number("n_spoof", cfg.corpus.n_spoof);
    s.number("train_fraction", cfg.corpus.train_fraction);
    sections.push_back(std::move(s));
  }
  {
    SynthParams& p = cfg.corpus.synth;
    Section s = section("synth");
    s.number("duration_s", p.duration_s);
    s.number("f0_hz", p.f0_hz);
    s.number("f0_spread", p.f0_spread);
    s.number("n_harmonics", p.n_harmonics);
    s.list("formant_centers_hz", p.formant_centers_hz);
    s.number("formant_bandwidth_hz", p.formant_bandwidth_hz);
    s.number("formant_spread", p.formant_spread);
    s.number("attack", p.envelope.attack);
    s.number("sustain", p.envelope.sustain);
    s.number("release", p.envelope.release);
    s.number("breath_db", p.breath_db);
    s.number("level_dbfs", p.level_dbfs);
    s.number("level_spread_db", p.level_spread_db);
    s.number("artifact_strength", p.artifact_strength);
    s.number("artifact_spread", p.artifact_spread);
    s.number("notch_low_hz", p.notch_low_hz);
    s.number("notch_high_hz", p.notch_high_hz);
    s.number("artifact_frame_ms", p.artifact_frame_ms);
    s.number("leading_silence_ms", p.leading_silence_ms);
    s.number("trailing_silence_ms", p.trailing_silence_ms);
    s.number("sample_rate_hz", p.sample_rate_hz);
    sections.push_back(std::move(s));
  }
  {
    BiasSpec& b = cfg.corpus.bias;
    Section s = section("bias");
    s.enumerated("kind", [&](const std::string& v) { b.kind = parse_bias_kind(v); });
    s.enumerated("target", [&](const std::string& v) { b.target = parse_label(v); });
    s.number("magnitude", b.magnitude);
    s.number("correlation", b.correlation);
    sections.push_back(std::move(s));
  }
  {
    InterventionSpec shared;
    std::vector<InterventionType> kinds{shared.type};
    Section s = section("intervention");
    s.enumerated("kinds", [&](const std::string& v) {
      kinds.clear();
      for (const auto& k : split_list(v)) kinds.push_back(parse_intervention(k));
      if (kinds.empty()) throw std::invalid_argument("at least one intervention kind is required");
    });
    s.range("snr_db", shared.snr_db);
    s.range("target_dbfs", shared.target_dbfs);
    s.range("cutoff_hz", shared.cutoff_hz);
    s.list("bits", shared.bits);
    s.text("external_command", shared.external_command);
    cfg.interventions.clear();
    for (InterventionType k : kinds) {
      if (std::any_of(cfg.interventions.begin(), cfg.interventions.end(),
                      [&](const InterventionSpec& x) { return x.type == k; })) {
        throw ConfigError(fmt::format("[intervention] kinds: '{}' listed twice", to_string(k)));
      }
      InterventionSpec spec = shared;
      spec.type = k;
      cfg.interventions.push_back(spec);
    }
    sections.push_back(std::move(s));
  }
  {
    Section s = section("trim");
    s.enumerated("phase", [&](const std::string& v) { cfg.trim = parse_trim_phase(v); });
    s.number("frame_ms", cfg.vad.frame_ms);
    s.number("shift_ms", cfg.vad.shift_ms);
    s.number("energy_threshold_db", cfg.vad.energy_threshold_db);
    s.number("absolute_floor_db", cfg.vad.absolute_floor_db);
    s.number("min_silence_ms", cfg.vad.min_silence_ms);
    sections.push_back(std::move(s));
  }
  {
    Section s = section("features");
    s.number("fft_size", cfg.train.features.fft_size);
    s.number("hop", cfg.train.features.hop);
    s.number("n_mel_bands", cfg.train.features.n_mel_bands);
    s.number("log_floor", cfg.train.features.log_floor);
    sections.push_back(std::move(s));
  }
  {
    Section s = section("model");
    s.number("hidden", cfg.train.shape.hidden);
    s.number("embedding", cfg.train.shape.embedding);
    sections.push_back(std::move(s));
  }
  {
    Section s = section("train");
    s.number("epochs", cfg.train.epochs);
    s.number("batch_size", cfg.train.batch_size);
    s.number("learning_rate", cfg.train.learning_rate);
    s.number("momentum", cfg.train.momentum);
    sections.push_back(std::move(s));
  }
  {
    LossSpec& l = cfg.train.loss;
    Section s = section("loss");
    s.enumerated("kind", [&](const std::string& v) { l.kind = parse_loss_kind(v); });
    s.number("weight_bonafide", l.weights.bonafide);
    s.number("weight_spoof", l.weights.spoof);
    s.number("gamma", l.gamma);
    s.number("q", l.q);
    s.number("lambda", l.lambda);
    s.enumerated("tau_mode", [&](const std::string& v) {
      if (v == "fixed") l.tau_mode = TauMode::fixed;
      else if (v == "ema") l.tau_mode = TauMode::ema;
      else throw std::invalid_argument(fmt::format("unknown tau mode '{}'", v));
    });
    s.number("tau_value", l.tau_value);
    s.number("tau_decay", l.tau_decay);
    s.number("margin", l.margin);
    s.number("scale", l.scale);
    s.number("t_alpha", l.t_alpha);
    s.enumerated("suite", [&](const std::string& v) {
      cfg.loss_suite.clear();
      for (const auto& k : split_list(v)) cfg.loss_suite.push_back(parse_loss_kind(k));
    });
    sections.push_back(std::move(s));
  }
  {
    Section s = section("matrix");
    s.boolean("both_phases", cfg.both_phases);
    s.boolean("label_flip", cfg.label_flip);
    s.enumerated("extras_class", [&](const std::string& v) { cfg.extras_class = parse_label(v); });
    sections.push_back(std::move(s));
  }
  for (const auto& s : sections) s.reject_unknown();

  if (seed_override) cfg.seed = seed_override;
  finalize(cfg);
  return cfg;
}

ExperimentConfig load_config(const fs::path& file, std::optional<std::uint64_t> seed_override) {
  std::string text;
  try {
    text = read_file(file);
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("cannot read config '{}': {}", file.string(), e.what()));
  }
  return parse_config(text, seed_override);
}

void finalize(ExperimentConfig& cfg) {
  if (!cfg.seed) throw ConfigError("a run seed is required ([run] seed or --seed)");
  cfg.corpus.seed = derive_seed(*cfg.seed, "corpus");
  cfg.train.seed = derive_seed(*cfg.seed, "train");
  cfg.train.shape.input = cfg.train.features.dim();
  try {
    validate(cfg.corpus);
    for (const auto& spec : cfg.interventions) validate(spec, cfg.corpus.synth.sample_rate_hz);
    if (cfg.interventions.empty()) throw std::invalid_argument("at least one intervention kind is required");
    validate(cfg.vad);
    validate(cfg.train);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

// ---------------------------------------------------------------------------
// Pipeline

Manifest prepare_corpus(const ExperimentConfig& cfg, const fs::path& out) {
  Manifest base = generate_corpus(cfg.corpus, out / "base");
  if (cfg.trim == TrimPhase::none) return base;

  const fs::path audio_dir = fs::absolute(out / "trimmed" / "audio").lexically_normal();
  fs::create_directories(audio_dir);
  const auto& entries = base.entries();
  std::vector<ManifestEntry> updated(entries.begin(), entries.end());
  std::vector<TrimResult> results(entries.size());
  std::vector<std::size_t> original(entries.size(), 0);
  parallel_for(entries.size(), [&](std::size_t i) {
    if (!trims(cfg.trim, entries[i].phase)) return;
    const Waveform w = read_wav(entries[i].audio_path);
    original[i] = w.size();
    results[i] = trim_silence(w, cfg.vad);
    updated[i].audio_path = audio_dir / (entries[i].id + ".wav");
    write_wav(updated[i].audio_path, results[i].audio);
  });

  Manifest trimmed;
  std::string audit;
  for (std::size_t i = 0; i < updated.size(); ++i) {
    const bool done = trims(cfg.trim, entries[i].phase);
    ojson line{{"id", entries[i].id},
               {"phase", to_string(entries[i].phase)},
               {"label", to_string(entries[i].label)},
               {"trimmed", done}};
    if (done) {
      line["original_samples"] = original[i];
      line["removed_samples"] = results[i].removed_samples;
      line["fully_silent"] = results[i].fully_silent;
    }
    audit += line.dump() + "\n";
    trimmed.add(updated[i]);
  }
  write_file(out / "trimmed" / "audit.jsonl", audit);
  trimmed.save(out / "trimmed" / std::string(kManifestFile));
  return trimmed;
}

ScoreSet score_manifest(const ModelParams& p, const Manifest& manifest) {
  const auto& entries = manifest.entries();
  std::vector<double> scores(entries.size());
  parallel_for(entries.size(), [&](std::size_t i) { scores[i] = score(p, read_wav(entries[i].audio_path)); });
  ScoreSet set;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    (entries[i].label == Label::bonafide ? set.bonafide : set.spoof).push_back(scores[i]);
  }
  return set;
}

namespace {

std::string rel(const fs::path& p, const fs::path& base) { return p.lexically_relative(base).generic_string(); }

std::string short_label(Label label) { return label == Label::bonafide ? "B" : "S"; }

std::vector<std::pair<std::string, std::string>> metadata_for(const ExperimentConfig& cfg) {
  std::string kinds;
  for (const auto& spec : cfg.interventions) {
    if (!kinds.empty()) kinds += ",";
    kinds += to_string(spec.type);
  }
  return {{"seed", std::to_string(*cfg.seed)},
          {"interventions", kinds},
          {"trim_phase", std::string(to_string(cfg.trim))},
          {"loss", std::string(to_string(cfg.train.loss.kind))},
          {"epochs", std::to_string(cfg.train.epochs)},
          {"te_model", "O"},
          {"tr_evaluation", "O test set"}};
}

// Hashes every regular file under root except outputs.json itself.
void write_outputs_manifest(const fs::path& root) {
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const std::string r = rel(e.path(), root);
    if (r != "outputs.json") files.push_back(r);
  }
  std::sort(files.begin(), files.end());
  ojson list = ojson::array();
  for (const auto& f : files) list.push_back({{"path", f}, {"sha256", sha256_file(root / f)}});
  write_file(root / "outputs.json", ojson{{"files", list}}.dump(2) + "\n");
}

struct TrainJob {
  std::string name;
  const Manifest* train_set;
  ModelParams params;
  LossTelemetry telemetry;
};

ModelRecord persist_model(const fs::path& root, const std::string& name, const ModelParams& p,
                          const LossTelemetry& telemetry) {
  std::string stem = name;
  std::replace(stem.begin(), stem.end(), '/', '_');
  const fs::path ckpt = root / "models" / (stem + ".json");
  const fs::path tele = root / "telemetry" / (stem + ".csv");
  save_checkpoint(ckpt, p);
  write_file(tele, to_csv(telemetry));
  return {name, rel(ckpt, root), sha256_file(ckpt), rel(tele, root)};
}

fs::path require_output_dir(const ExperimentConfig& cfg) {
  if (cfg.output_dir.empty()) throw ConfigError("an output directory is required ([run] output_dir or --out)");
  fs::create_directories(cfg.output_dir);
  return fs::absolute(cfg.output_dir).lexically_normal();
}

}  // namespace

ExperimentReport run_matrix(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  finalize(cfg);
  const fs::path root = require_output_dir(cfg);
  fs::remove(root / "FAILED");
  fs::remove(root / "report_partial.json");

  std::vector<ResultRow> rows;
  std::vector<ModelRecord> models;
  try {
    const Manifest corpus = prepare_corpus(cfg, root / "corpus");
    if (cfg.trim != TrimPhase::none) {
      fs::copy_file(root / "corpus" / "trimmed" / "audit.jsonl", root / "trim_audit.jsonl",
                    fs::copy_options::overwrite_existing);
    }
    const std::uint64_t seed = derive_seed(*cfg.seed, "interventions");

    // Configurations are materialized up front so training jobs only read.
    const ConfiguredSplit original =
        build_configuration(ConfigurationId::O, corpus, cfg.interventions.front(), seed, root / "configs" / "O");
    std::vector<std::map<ConfigurationId, ConfiguredSplit>> splits(cfg.interventions.size());
    for (std::size_t k = 0; k < cfg.interventions.size(); ++k) {
      const auto& spec = cfg.interventions[k];
      const std::string kind(to_string(spec.type));
      for (ConfigurationId id : kAllConfigurations) {
        if (id == ConfigurationId::O) continue;
        splits[k].emplace(id, build_configuration(id, corpus, spec, seed,
                                                  root / "configs" / kind / std::string(to_string(id))));
      }
    }

    std::vector<TrainJob> jobs;
    jobs.push_back({"O", &original.train, {}, {}});
    for (std::size_t k = 0; k < cfg.interventions.size(); ++k) {
      const std::string kind(to_string(cfg.interventions[k].type));
      jobs.push_back({kind + "/Tr_B", &splits[k].at(ConfigurationId::Tr_B).train, {}, {}});
      jobs.push_back({kind + "/Tr_S", &splits[k].at(ConfigurationId::Tr_S).train, {}, {}});
    }
    parallel_for(jobs.size(), [&](std::size_t j) {
      TrainResult r = train(*jobs[j].train_set, cfg.train);
      jobs[j].params = std::move(r.params);
      jobs[j].telemetry = std::move(r.telemetry);
    });
    for (const auto& job : jobs) models.push_back(persist_model(root, job.name, job.params, job.telemetry));
    auto params_of = [&](const std::string& name) -> const ModelParams& {
      for (const auto& job : jobs) {
        if (job.name == name) return job.params;
      }
      throw std::logic_error("no trained model named " + name);
    };

    auto evaluate = [&](const std::string& intervention, const std::string& configuration,
                        const std::string& model, const Manifest& test) {
      rows.push_back({intervention, configuration, compute_eer(score_manifest(params_of(model), test)).eer, model});
    };

    evaluate("", "O", "O", original.test);
    for (std::size_t k = 0; k < cfg.interventions.size(); ++k) {
      const std::string kind(to_string(cfg.interventions[k].type));
      const auto& s = splits[k];
      evaluate(kind, "Tr_B", kind + "/Tr_B", s.at(ConfigurationId::Tr_B).test);
      evaluate(kind, "Tr_S", kind + "/Tr_S", s.at(ConfigurationId::Tr_S).test);
      evaluate(kind, "Te_B", "O", s.at(ConfigurationId::Te_B).test);
      evaluate(kind, "Te_S", "O", s.at(ConfigurationId::Te_S).test);

      const Label c = cfg.extras_class;
      const Label other = c == Label::bonafide ? Label::spoof : Label::bonafide;
      const std::string tr_model = kind + "/Tr_" + short_label(c);
      auto te_of = [&](Label l) {
        return l == Label::bonafide ? ConfigurationId::Te_B : ConfigurationId::Te_S;
      };
      if (cfg.both_phases) evaluate(kind, "Both_" + short_label(c), tr_model, s.at(te_of(c)).test);
      if (cfg.label_flip) evaluate(kind, "Flip_" + short_label(other), tr_model, s.at(te_of(other)).test);
    }

    ExperimentReport report = assemble_report(rows, models, metadata_for(cfg));
    write_file(root / "report.json", to_json(report));
    write_file(root / "report.csv", to_csv(report));
    write_file(root / "report_train.csv", to_train_csv(report));
    write_outputs_manifest(root);
    return report;
  } catch (const std::exception& e) {
    ExperimentReport partial;
    partial.metadata = metadata_for(cfg);
    partial.rows = rows;
    partial.models = models;
    write_file(root / "report_partial.json", to_json(partial));
    write_file(root / "FAILED", std::string(e.what()) + "\n");
    throw;
  }
}

std::vector<LossSpec> loss_suite(const ExperimentConfig& cfg) {
  std::vector<LossKind> kinds = cfg.loss_suite;
  if (kinds.empty()) kinds.assign(std::begin(kAllLosses), std::end(kAllLosses));
  std::vector<LossSpec> out;
  for (LossKind k : kinds) {
    LossSpec spec = cfg.train.loss;
    spec.kind = k;
    out.push_back(spec);
  }
  return out;
}

std::vector<LossComparisonRow> run_loss_comparison(const ExperimentConfig& cfg_in, const std::vector<LossSpec>& losses) {
  if (losses.empty()) throw std::invalid_argument("loss comparison needs at least one loss");
  ExperimentConfig cfg = cfg_in;
  finalize(cfg);
  for (const auto& l : losses) validate(l);
  const fs::path root = require_output_dir(cfg);

  const Manifest corpus = prepare_corpus(cfg, root / "corpus");
  const ConfiguredSplit original = build_configuration(ConfigurationId::O, corpus, cfg.interventions.front(),
                                                       derive_seed(*cfg.seed, "interventions"),
                                                       root / "configs" / "O");

  std::vector<LossComparisonRow> rows(losses.size());
  std::vector<ModelParams> params(losses.size());
  parallel_for(losses.size(), [&](std::size_t i) {
    TrainConfig tc = cfg.train;
    tc.loss = losses[i];
    TrainResult r = train(original.train, tc);
    params[i] = std::move(r.params);
    rows[i].loss = losses[i].kind;
    rows[i].curves = std::move(r.telemetry);
  });

  std::string csv = "loss,eer,telemetry,checkpoint,sha256\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ModelRecord rec =
        persist_model(root, "loss_" + std::string(to_string(rows[i].loss)), params[i], rows[i].curves);
    rows[i].eer = compute_eer(score_manifest(params[i], original.test)).eer;
    rows[i].telemetry = rec.telemetry;
    csv += fmt::format("{},{},{},{},{}\n", to_string(rows[i].loss), format_percent(rows[i].eer), rec.telemetry,
                       rec.checkpoint, rec.sha256);
  }
  write_file(root / "loss_comparison.csv", csv);
  write_outputs_manifest(root);
  return rows;
}

}  // namespace spoofprobe
