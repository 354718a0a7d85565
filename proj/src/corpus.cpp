#include "spoofprobe/corpus.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "spoofprobe/parallel.hpp"
#include "spoofprobe/rng.hpp"
#include "spoofprobe/wav_io.hpp"

namespace spoofprobe {

namespace fs = std::filesystem;

std::string_view to_string(BiasKind kind) {
  switch (kind) {
    case BiasKind::none: return "none";
    case BiasKind::silence_pad: return "silence_pad";
    case BiasKind::loudness_offset: return "loudness_offset";
  }
  return "?";
}

BiasKind parse_bias_kind(std::string_view text) {
  if (text == "none") return BiasKind::none;
  if (text == "silence_pad") return BiasKind::silence_pad;
  if (text == "loudness_offset") return BiasKind::loudness_offset;
  throw std::invalid_argument("unknown bias kind '" + std::string(text) + "'");
}

void validate(const BiasSpec& bias) {
  if (!(bias.correlation >= 0.0 && bias.correlation <= 1.0)) {
    throw std::invalid_argument("bias correlation must lie in [0, 1]");
  }
  if (bias.kind == BiasKind::silence_pad && bias.magnitude < 0.0) {
    throw std::invalid_argument("silence pad must be non-negative");
  }
}

void validate(const CorpusSpec& spec) {
  if (spec.n_bonafide < 1 || spec.n_spoof < 1) throw std::invalid_argument("class counts must be >= 1");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  validate(spec.synth);
  validate(spec.bias);
}

namespace {

struct ItemPlan {
  std::string id;
  Label label;
  Phase phase;
  bool biased;
};

void apply_bias(Waveform& w, const BiasSpec& bias) {
  switch (bias.kind) {
    case BiasKind::none:
      return;
    case BiasKind::silence_pad: {
      const std::size_t pad = ms_to_samples(bias.magnitude, w.sample_rate_hz);
      w.samples.insert(w.samples.begin(), pad, 0.0);
      return;
    }
    case BiasKind::loudness_offset: {
      const double g = std::pow(10.0, bias.magnitude / 20.0);
      for (double& s : w.samples) s *= g;
      clamp_unit(w.samples);
      return;
    }
  }
}

}  // namespace

Manifest generate_corpus(const CorpusSpec& spec, const fs::path& out_dir) {
  validate(spec);
  std::error_code ec;
  fs::create_directories(out_dir / "audio", ec);
  if (ec) throw std::runtime_error("cannot create corpus directory " + out_dir.string() + ": " + ec.message());

  std::vector<ItemPlan> items;
  for (Label label : {Label::bonafide, Label::spoof}) {
    const int n = label == Label::bonafide ? spec.n_bonafide : spec.n_spoof;
    const auto n_train = static_cast<int>(std::lround(spec.train_fraction * n));
    std::vector<bool> biased(static_cast<std::size_t>(n), false);
    if (spec.bias.kind != BiasKind::none && spec.bias.target == label) {
      // Exactly round(correlation * n) items, picked by a seeded shuffle.
      std::vector<std::size_t> order(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), 0);
      Rng rng(derive_seed(spec.seed, "bias"));
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
      const auto k = static_cast<std::size_t>(std::lround(spec.bias.correlation * n));
      for (std::size_t i = 0; i < k; ++i) biased[order[i]] = true;
    }
    const char* prefix = label == Label::bonafide ? "bona" : "spoof";
    for (int i = 0; i < n; ++i) {
      items.push_back({fmt::format("{}_{:05d}", prefix, i), label,
                       i < n_train ? Phase::train : Phase::test, biased[static_cast<std::size_t>(i)]});
    }
  }

  const fs::path audio_dir = fs::absolute(out_dir / "audio").lexically_normal();
  parallel_for(items.size(), [&](std::size_t i) {
    const ItemPlan& item = items[i];
    Waveform w = synth_utterance(spec.synth, item.label, derive_seed(spec.seed, item.id));
    if (item.biased) apply_bias(w, spec.bias);
    write_wav(audio_dir / (item.id + ".wav"), w);
  });

  Manifest m;
  for (const auto& item : items) {
    m.add({item.id, audio_dir / (item.id + ".wav"), item.label, item.phase, false});
  }
  m.save(out_dir / kManifestFile);
  return m;
}

std::string_view to_string(ConfigurationId id) {
  switch (id) {
    case ConfigurationId::O: return "O";
    case ConfigurationId::Tr_B: return "Tr_B";
    case ConfigurationId::Tr_S: return "Tr_S";
    case ConfigurationId::Te_B: return "Te_B";
    case ConfigurationId::Te_S: return "Te_S";
  }
  return "?";
}

ConfigurationId parse_configuration(std::string_view text) {
  for (ConfigurationId id : kAllConfigurations) {
    if (to_string(id) == text) return id;
  }
  throw std::invalid_argument("unknown configuration '" + std::string(text) +
                              "' (expected O, Tr_B, Tr_S, Te_B or Te_S)");
}

bool InterventionPlan::covers(Phase phase, Label label) const {
  return std::find(subsets.begin(), subsets.end(), Subset{phase, label}) != subsets.end();
}

InterventionPlan plan_for(ConfigurationId id) {
  switch (id) {
    case ConfigurationId::O: return {};
    case ConfigurationId::Tr_B: return {{{Phase::train, Label::bonafide}}};
    case ConfigurationId::Tr_S: return {{{Phase::train, Label::spoof}}};
    case ConfigurationId::Te_B: return {{{Phase::test, Label::bonafide}}};
    case ConfigurationId::Te_S: return {{{Phase::test, Label::spoof}}};
  }
  throw std::logic_error("unhandled configuration");
}

std::uint64_t item_intervention_seed(std::uint64_t run_seed, std::string_view item_id) {
  return derive_seed(derive_seed(run_seed, "intervention"), item_id);
}

ConfiguredSplit build_plan(const InterventionPlan& plan, const Manifest& manifest,
                           const InterventionSpec& spec, std::uint64_t seed, const fs::path& out_dir) {
  for (Phase phase : {Phase::train, Phase::test}) {
    for (Label label : {Label::bonafide, Label::spoof}) {
      if (manifest.count(phase, label) == 0) {
        throw std::invalid_argument(fmt::format("subset ({}, {}) is empty", to_string(phase), to_string(label)));
      }
    }
  }

  const fs::path audio_dir = fs::absolute(out_dir / "audio").lexically_normal();
  fs::create_directories(out_dir);
  const auto& entries = manifest.entries();
  std::vector<ManifestEntry> updated(entries.begin(), entries.end());
  std::vector<std::size_t> targets;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    updated[i].intervened = plan.covers(entries[i].phase, entries[i].label);
    if (updated[i].intervened) {
      targets.push_back(i);
      updated[i].audio_path = audio_dir / (entries[i].id + ".wav");
    }
  }
  if (!targets.empty()) fs::create_directories(audio_dir);
  parallel_for(targets.size(), [&](std::size_t t) {
    const ManifestEntry& src = entries[targets[t]];
    const Waveform w = read_wav(src.audio_path);
    write_wav(updated[targets[t]].audio_path,
              apply_intervention(w, spec, item_intervention_seed(seed, src.id)));
  });

  ConfiguredSplit split;
  for (auto& e : updated) (e.phase == Phase::train ? split.train : split.test).add(std::move(e));
  split.train.save(out_dir / "train.jsonl");
  split.test.save(out_dir / "test.jsonl");
  return split;
}

ConfiguredSplit build_configuration(ConfigurationId id, const Manifest& manifest,
                                    const InterventionSpec& spec, std::uint64_t seed,
                                    const fs::path& out_dir) {
  return build_plan(plan_for(id), manifest, spec, seed, out_dir);
}

}  // namespace spoofprobe
