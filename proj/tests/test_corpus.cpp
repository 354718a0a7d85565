#include <doctest.h>

#include <map>

#include "spoofprobe/corpus.hpp"
#include "spoofprobe/hash.hpp"
#include "spoofprobe/rng.hpp"
#include "spoofprobe/vad.hpp"
#include "spoofprobe/wav_io.hpp"
#include "support.hpp"

using namespace spoofprobe;
using namespace testsupport;

namespace {

CorpusSpec small_spec(int nb = 10, int ns = 90) {
  CorpusSpec spec;
  spec.n_bonafide = nb;
  spec.n_spoof = ns;
  spec.synth.duration_s = 0.3;
  spec.synth.artifact_strength = 0.5;
  spec.seed = 17;
  return spec;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("stratified 80/20 split") {
  TempDir dir("corpus");
  const Manifest m = generate_corpus(small_spec(), dir.path());
  CHECK(m.size() == 100);
  CHECK(m.count(Phase::train, Label::bonafide) == 8);
  CHECK(m.count(Phase::test, Label::bonafide) == 2);
  CHECK(m.count(Phase::train, Label::spoof) == 72);
  CHECK(m.count(Phase::test, Label::spoof) == 18);
  for (const auto& e : m.entries()) {
    CHECK(fs::exists(e.audio_path));
    CHECK_FALSE(e.intervened);
  }
  CHECK(Manifest::load(dir / std::string(kManifestFile)) == m);
}

TEST_CASE("regeneration reproduces manifests and audio byte for byte") {
  TempDir a("corpus_a"), b("corpus_b");
  generate_corpus(small_spec(), a.path());
  generate_corpus(small_spec(), b.path());
  const std::string ma = read_file(a / std::string(kManifestFile));
  CHECK(ma == read_file(b / std::string(kManifestFile)));
  CHECK(sha256_file(a / "audio/spoof_00042.wav") == sha256_file(b / "audio/spoof_00042.wav"));
  // Paths are stored relative to the manifest.
  CHECK(ma.find(a.path().string()) == std::string::npos);
}

TEST_CASE("bias none: classes differ only through the artifact") {
  TempDir dir("corpus");
  CorpusSpec spec = small_spec(3, 3);
  const Manifest m = generate_corpus(spec, dir.path());
  for (const auto& e : m.entries()) {
    const Waveform disk = read_wav(e.audio_path);
    const std::uint64_t seed = derive_seed(spec.seed, e.id);
    CHECK(disk == quantize_pcm16(synth_utterance(spec.synth, e.label, seed)));
    if (e.label == Label::spoof) {
      SynthParams off = spec.synth;
      off.artifact_strength = 0.0;
      CHECK(quantize_pcm16(synth_utterance(off, Label::spoof, seed)) ==
            quantize_pcm16(synth_utterance(spec.synth, Label::bonafide, seed)));
    }
  }
}

TEST_CASE("silence-pad bias shows up in VAD-measured leading silence") {
  TempDir dir("corpus");
  CorpusSpec spec = small_spec(20, 20);
  spec.bias = {BiasKind::silence_pad, Label::bonafide, 300.0, 1.0};
  const Manifest m = generate_corpus(spec, dir.path());
  VadConfig vad;
  double bona = 0.0, spoof = 0.0;
  for (const auto& e : m.entries()) {
    const double lead = leading_silence_ms(read_wav(e.audio_path), vad);
    (e.label == Label::bonafide ? bona : spoof) += lead / 20.0;
  }
  CHECK(bona - spoof == doctest::Approx(300.0).epsilon(0.05));
}

TEST_CASE("bias correlation selects an exact fraction of the target class") {
  TempDir dir("corpus");
  CorpusSpec spec = small_spec(20, 10);
  spec.bias = {BiasKind::silence_pad, Label::bonafide, 100.0, 0.25};
  const Manifest m = generate_corpus(spec, dir.path());
  const std::size_t base = ms_to_samples(300.0, 16000);
  int padded = 0;
  for (const auto& e : m.entries()) {
    const std::size_t n = read_wav(e.audio_path).size();
    if (n > base) {
      ++padded;
      CHECK(e.label == Label::bonafide);
    }
  }
  CHECK(padded == 5);
  BiasSpec bad{BiasKind::silence_pad, Label::bonafide, 10.0, 1.5};
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("the five configurations intervene exactly their subset") {
  TempDir dir("corpus");
  const Manifest m = generate_corpus(small_spec(), dir / "base");
  const std::map<ConfigurationId, std::pair<Phase, Label>> target = {
      {ConfigurationId::Tr_B, {Phase::train, Label::bonafide}},
      {ConfigurationId::Tr_S, {Phase::train, Label::spoof}},
      {ConfigurationId::Te_B, {Phase::test, Label::bonafide}},
      {ConfigurationId::Te_S, {Phase::test, Label::spoof}}};
  for (ConfigurationId id : kAllConfigurations) {
    const std::string name(to_string(id));
    const ConfiguredSplit split = build_configuration(id, m, InterventionSpec{}, 5, dir / name);
    CHECK(split.train.size() + split.test.size() == m.size());
    for (Phase ph : {Phase::train, Phase::test}) {
      for (Label lb : {Label::bonafide, Label::spoof}) {
        const Manifest& side = ph == Phase::train ? split.train : split.test;
        CHECK(side.count(ph, lb) == m.count(ph, lb));
      }
    }
    for (const Manifest* side : {&split.train, &split.test}) {
      for (const auto& e : side->entries()) {
        const ManifestEntry& orig = m.at(e.id);
        CHECK(e.label == orig.label);
        CHECK(e.phase == orig.phase);
        const bool expected =
            id != ConfigurationId::O && target.at(id) == std::make_pair(e.phase, e.label);
        CHECK(e.intervened == expected);
        if (expected) {
          CHECK(e.audio_path != orig.audio_path);
          CHECK(read_wav(e.audio_path) != read_wav(orig.audio_path));
        } else {
          CHECK(e.audio_path == orig.audio_path);
        }
      }
    }
    CHECK(Manifest::load(dir / name / "train.jsonl") == split.train);
    CHECK(Manifest::load(dir / name / "test.jsonl") == split.test);
  }
}

TEST_CASE("configurations require all four subsets") {
  TempDir dir("corpus");
  CorpusSpec spec = small_spec(1, 10);
  const Manifest m = generate_corpus(spec, dir / "base");
  CHECK(m.count(Phase::test, Label::bonafide) == 0);
  CHECK_THROWS_AS(build_configuration(ConfigurationId::O, m, InterventionSpec{}, 1, dir / "O"),
                  std::invalid_argument);
}

TEST_CASE("manifest ids are unique and json lines keep key order") {
  Manifest m;
  m.add({"a", "/x/a.wav", Label::bonafide, Phase::train, false});
  CHECK_THROWS_AS(m.add({"a", "/x/b.wav", Label::spoof, Phase::test, true}), std::invalid_argument);
  m.add({"b", "/x/sub/b.wav", Label::spoof, Phase::test, true});
  const std::string text = m.to_jsonl("/x");
  CHECK(text ==
        "{\"id\":\"a\",\"audio_path\":\"a.wav\",\"label\":\"bonafide\",\"phase\":\"train\",\"intervened\":false}\n"
        "{\"id\":\"b\",\"audio_path\":\"sub/b.wav\",\"label\":\"spoof\",\"phase\":\"test\",\"intervened\":true}\n");
  CHECK(Manifest::from_jsonl(text, "/x") == m);
  CHECK_THROWS(Manifest::from_jsonl("{\"id\":\"a\"}\n", "/x"));
}

TEST_CASE("CorpusSpec validation") {
  CorpusSpec spec = small_spec();
  spec.n_bonafide = 0;
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec = small_spec();
  spec.train_fraction = 1.0;
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  CHECK(parse_configuration("Te_S") == ConfigurationId::Te_S);
  CHECK_THROWS_AS(parse_configuration("Te_X"), std::invalid_argument);
}

}  // TEST_SUITE
