#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spoofprobe/features.hpp"
#include "spoofprobe/losses.hpp"

namespace spoofprobe {

// Which head produces the detection score.
enum class ScoreHead { logits, cosine };

// Feature dimension -> hidden (ReLU) -> embedding (ReLU), followed by an
// affine two-logit head and a cosine head against two class vectors.
struct ModelShape {
  int input = 48;
  int hidden = 64;
  int embedding = 32;
  bool operator==(const ModelShape&) const = default;
};

// Offsets of every parameter block inside the flat parameter vector.
struct ParamLayout {
  ModelShape shape;
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0, w3 = 0, b3 = 0, classes = 0, total = 0;
  explicit ParamLayout(ModelShape s);
};

struct ModelParams {
  FeatureConfig features;
  int sample_rate_hz = 16000;
  ModelShape shape;
  // Input standardization fitted on the training features.
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  // All trainable parameters, addressed through ParamLayout.
  std::vector<double> weights;
  ScoreHead head = ScoreHead::logits;
  double cos_scale = 8.0;

  ParamLayout layout() const { return ParamLayout(shape); }
  bool operator==(const ModelParams&) const = default;
};

// Uniform +-sqrt(6 / (fan_in + fan_out)) weights, zero biases, orthonormal
// class vectors. Standardization starts as the identity.
ModelParams init_params(ModelShape shape, const FeatureConfig& features, int sample_rate_hz,
                        std::uint64_t seed);

struct ForwardOut {
  std::vector<double> standardized;
  std::vector<double> hidden_pre;
  std::vector<double> hidden;
  std::vector<double> embedding_pre;
  std::vector<double> embedding;
  double embedding_norm = 0.0;
  Pair logits{0.0, 0.0};
  Pair cosines{0.0, 0.0};
};

// Throws std::invalid_argument on a dimension mismatch.
ForwardOut forward(const ModelParams& p, std::span<const double> features);

// Accumulates into grad (same layout as p.weights) the parameter gradient
// given loss gradients at both heads.
void backward(const ModelParams& p, const ForwardOut& f, const Pair& d_logits, const Pair& d_cos,
              std::span<double> grad);

// logit_bona - logit_spf, or scale * (cos_bona - cos_spf) for cosine-head
// models. Higher means more bonafide.
double score_features(const ModelParams& p, std::span<const double> features);
double score(const ModelParams& p, const Waveform& w);

// Versioned JSON checkpoint. Doubles are written in shortest round-trip
// form, so a reloaded model scores bit-identically.
std::string to_checkpoint(const ModelParams& p);
ModelParams from_checkpoint(std::string_view text);
void save_checkpoint(const std::filesystem::path& file, const ModelParams& p);
ModelParams load_checkpoint(const std::filesystem::path& file);

}  // namespace spoofprobe
