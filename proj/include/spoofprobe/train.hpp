#pragma once

#include <cstdint>
#include <vector>

#include "spoofprobe/losses.hpp"
#include "spoofprobe/manifest.hpp"
#include "spoofprobe/model.hpp"

namespace spoofprobe {

struct TrainConfig {
  int epochs = 30;
  int batch_size = 32;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  LossSpec loss;
  ModelShape shape;
  FeatureConfig features;
};

void validate(const TrainConfig& tc);

struct Example {
  std::vector<double> features;
  Label label = Label::bonafide;
};

struct TrainResult {
  ModelParams params;
  LossTelemetry telemetry;
};

// SGD with momentum over a per-epoch seeded shuffle. Single-threaded and
// fully determined by (examples, config). Throws std::invalid_argument if
// only one class is present.
TrainResult train_examples(const std::vector<Example>& examples, const TrainConfig& tc,
                           int sample_rate_hz = 16000);

// Loads and featurizes the manifest's audio, then trains.
TrainResult train(const Manifest& train_manifest, const TrainConfig& tc);

std::vector<Example> load_examples(const Manifest& manifest, const FeatureConfig& features);

// Weighted batch objective (1/n) sum_i w_{y_i} * raw_i with state held fixed.
double batch_objective(const ModelParams& p, const std::vector<Example>& batch,
                       const LossSpec& spec, const LossState& state);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  // Coordinates whose perturbation crossed a ReLU kink or loss branch.
  std::size_t skipped = 0;
};

// Central differences (step h) against the analytic gradient of
// batch_objective on n_coords randomly chosen parameters (0 = all).
// Relative error is |a - n| / max(|a|, |n|, denominator_floor).
GradCheckResult grad_check(const ModelParams& p, const std::vector<Example>& batch,
                           const LossSpec& spec, const LossState& state, std::size_t n_coords,
                           std::uint64_t seed, double h = 1e-5, double denominator_floor = 1e-6);

}  // namespace spoofprobe
