#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spoofprobe/waveform.hpp"

namespace spoofprobe {

enum class LossKind { cce, focal, super, curricular, gce };

inline constexpr LossKind kAllLosses[] = {LossKind::cce, LossKind::focal, LossKind::super,
                                          LossKind::curricular, LossKind::gce};

std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view text);

enum class TauMode { fixed, ema };

struct ClassWeights {
  double bonafide = 0.9;
  double spoof = 0.1;
  double operator[](Label label) const { return label == Label::bonafide ? bonafide : spoof; }
};

// Training objective and all of its hyperparameters. Only the fields of the
// active kind are read.
struct LossSpec {
  LossKind kind = LossKind::cce;
  ClassWeights weights;
  double gamma = 2.0;   // focal
  double q = 0.7;       // gce
  double lambda = 1.0;  // super
  TauMode tau_mode = TauMode::ema;
  double tau_value = 0.69314718055994531;  // fixed tau, and the EMA start
  double tau_decay = 0.9;
  double margin = 0.2;  // curricular
  double scale = 8.0;
  double t_alpha = 0.01;
};

void validate(const LossSpec& spec);

inline constexpr double kProbFloor = 1e-12;

using Pair = std::array<double, 2>;

inline std::size_t class_index(Label label) { return label == Label::bonafide ? 0 : 1; }

Pair softmax(const Pair& logits);

struct LossGrad {
  double loss = 0.0;
  // Gradient with respect to the logits fed to the softmax (cosines for
  // curricular).
  Pair grad{0.0, 0.0};
};

// -w * log p_label
LossGrad cce(const Pair& probs, Label label, const ClassWeights& weights);
// -w * (1 - p)^gamma * log p
LossGrad focal(const Pair& probs, Label label, double gamma, const ClassWeights& weights);
// w * (1 - p^q) / q
LossGrad gce(const Pair& probs, Label label, double q, const ClassWeights& weights);

// Principal branch of the Lambert W function, x >= -1/e. Halley iteration.
double lambert_w(double x);

struct SuperLossValue {
  double loss = 0.0;
  double sigma = 1.0;
};

// Confidence-weighted loss (l - tau) * sigma + lambda * log(sigma)^2 at the
// closed-form minimizer sigma* = exp(-W(max(-2/e, (l - tau)/lambda) / 2)).
// d(loss)/dl equals sigma*.
SuperLossValue superloss(double base_loss, double tau, double lambda);

struct CurricularValue {
  double loss = 0.0;
  Pair grad{0.0, 0.0};  // with respect to the cosines
  bool hard = false;    // the non-target cosine was modulated
  Pair modified_logits{0.0, 0.0};
};

// Margin-based softmax on cosines: target s*cos(theta_y + m); a non-target
// cosine exceeding cos(theta_y + m) becomes cos_j * (t + cos_j). The
// modulation coefficient t is held constant. Unweighted.
CurricularValue curricular(const Pair& cosines, Label label, double margin, double scale,
                           double t);

// t <- alpha * mean_target_cos + (1 - alpha) * t.
double curricular_update(double t, double mean_target_cos, double alpha);

// State of the batch-level adaptive pieces.
struct LossState {
  double tau = 0.69314718055994531;
  double t = 0.0;
};

LossState initial_state(const LossSpec& spec);

// One sample's unweighted objective and gradients with respect to both
// heads. The class weight is applied by the caller as an outer factor.
struct SampleLoss {
  double raw = 0.0;
  Pair d_logits{0.0, 0.0};
  Pair d_cos{0.0, 0.0};
  // Diagnostic branch flag (curricular hard negative, super clamp).
  bool branch = false;
  double base_loss = 0.0;
  double target_cos = 0.0;
};

SampleLoss evaluate_sample(const LossSpec& spec, const Pair& logits, const Pair& cosines,
                           Label label, const LossState& state);

// Updates tau (super, ema mode) and t (curricular) once per batch.
LossState update_state(const LossSpec& spec, const LossState& state,
                       std::span<const SampleLoss> batch);

struct EpochRecord {
  int epoch = 0;
  std::optional<double> bonafide_raw;
  std::optional<double> spoof_raw;
  double weighted = 0.0;
  std::size_t n_bonafide = 0;
  std::size_t n_spoof = 0;
  std::optional<double> tau;
  std::optional<double> t;

  bool operator==(const EpochRecord&) const = default;
};

// Mean raw loss per class over this epoch's samples; a class with no samples
// is left empty rather than reported as zero.
EpochRecord per_class_telemetry(std::span<const double> raw_losses, std::span<const Label> labels,
                                const ClassWeights& weights, int epoch);

struct LossTelemetry {
  std::vector<EpochRecord> epochs;
  bool operator==(const LossTelemetry&) const = default;
};

// Columns: epoch, loss_bona_raw, loss_spf_raw, loss_weighted, tau, t.
// Missing values are empty cells.
std::string to_csv(const LossTelemetry& telemetry);

}  // namespace spoofprobe
