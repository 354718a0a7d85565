#include "spoofprobe/losses.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace spoofprobe {
namespace {

constexpr double kInvE = 0.36787944117144233;  // 1/e

double target_prob(const Pair& probs, Label label) {
  return std::max(probs[class_index(label)], kProbFloor);
}

Pair one_hot(Label label) {
  Pair y{0.0, 0.0};
  y[class_index(label)] = 1.0;
  return y;
}

// grad_k = dl/dp * dp/dz_k for p = softmax_y.
Pair chain_softmax(double dl_dp, const Pair& probs, Label label) {
  const Pair y = one_hot(label);
  const double p = probs[class_index(label)];
  return {dl_dp * p * (y[0] - probs[0]), dl_dp * p * (y[1] - probs[1])};
}

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::cce: return "cce";
    case LossKind::focal: return "focal";
    case LossKind::super: return "super";
    case LossKind::curricular: return "curricular";
    case LossKind::gce: return "gce";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view text) {
  for (LossKind k : kAllLosses) {
    if (to_string(k) == text) return k;
  }
  throw std::invalid_argument("unknown loss '" + std::string(text) + "'");
}

void validate(const LossSpec& s) {
  if (!(s.weights.bonafide > 0.0 && s.weights.spoof > 0.0)) {
    throw std::invalid_argument("class weights must be positive");
  }
  if (!(s.gamma >= 0.0)) throw std::invalid_argument("focal gamma must be >= 0");
  if (!(s.q > 0.0 && s.q <= 1.0)) throw std::invalid_argument("gce q must lie in (0, 1]");
  if (!(s.lambda > 0.0)) throw std::invalid_argument("superloss lambda must be positive");
  if (!(s.tau_decay >= 0.0 && s.tau_decay < 1.0)) throw std::invalid_argument("tau decay must lie in [0, 1)");
  if (!(s.margin >= 0.0)) throw std::invalid_argument("curricular margin must be >= 0");
  if (!(s.scale > 0.0)) throw std::invalid_argument("curricular scale must be positive");
  if (!(s.t_alpha > 0.0 && s.t_alpha < 1.0)) throw std::invalid_argument("curricular t alpha must lie in (0, 1)");
}

Pair softmax(const Pair& z) {
  const double m = std::max(z[0], z[1]);
  const double e0 = std::exp(z[0] - m);
  const double e1 = std::exp(z[1] - m);
  const double sum = e0 + e1;
  return {e0 / sum, e1 / sum};
}

LossGrad cce(const Pair& probs, Label label, const ClassWeights& weights) {
  const double w = weights[label];
  const Pair y = one_hot(label);
  return {-w * std::log(target_prob(probs, label)),
          {w * (probs[0] - y[0]), w * (probs[1] - y[1])}};
}

LossGrad focal(const Pair& probs, Label label, double gamma, const ClassWeights& weights) {
  const double w = weights[label];
  const double p = target_prob(probs, label);
  const double log_p = std::log(p);
  const double one_minus = 1.0 - probs[class_index(label)];
  const double mod = std::pow(one_minus, gamma);
  double dl_dp = -mod / p;
  if (gamma != 0.0 && one_minus > 0.0) dl_dp += gamma * std::pow(one_minus, gamma - 1.0) * log_p;
  const Pair g = chain_softmax(w * dl_dp, probs, label);
  return {-w * mod * log_p, g};
}

LossGrad gce(const Pair& probs, Label label, double q, const ClassWeights& weights) {
  const double w = weights[label];
  const double p = target_prob(probs, label);
  const double pq = std::pow(p, q);
  const Pair g = chain_softmax(-w * pq / p, probs, label);
  return {w * (1.0 - pq) / q, g};
}

double lambert_w(double x) {
  if (std::isnan(x)) throw std::domain_error("lambert_w of NaN");
  if (x < -kInvE) {
    if (x < -kInvE * (1.0 + 4.0 * std::numeric_limits<double>::epsilon())) {
      throw std::domain_error(fmt::format("lambert_w argument {} is below -1/e", x));
    }
    x = -kInvE;
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;

  double w;
  if (x < -0.25) {
    // Branch-point series in p = sqrt(2(ex + 1)).
    const double p = std::sqrt(std::max(0.0, 2.0 * (std::numbers::e * x + 1.0)));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    if (p < 1e-4) return w;
  } else if (x < 3.0) {
    const double l = std::log1p(x);
    w = l * (1.0 - std::log1p(l) / (2.0 + l));
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }

  for (int i = 0; i < 64; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w))) break;
  }
  return w;
}

SuperLossValue superloss(double base_loss, double tau, double lambda) {
  if (!std::isfinite(base_loss)) throw std::invalid_argument("superloss requires a finite base loss");
  if (!(lambda > 0.0)) throw std::invalid_argument("superloss lambda must be positive");
  const double beta = (base_loss - tau) / lambda;
  const double w = lambert_w(0.5 * std::max(-2.0 * kInvE, beta));
  const double sigma = std::exp(-w);
  return {(base_loss - tau) * sigma + lambda * w * w, sigma};
}

CurricularValue curricular(const Pair& cosines, Label label, double margin, double scale, double t) {
  for (double c : cosines) {
    if (!(c >= -1.0 - 1e-9 && c <= 1.0 + 1e-9)) {
      throw std::invalid_argument(fmt::format("cosine {} outside [-1, 1]", c));
    }
  }
  const std::size_t yi = class_index(label);
  const std::size_t ji = 1 - yi;
  const double cos_y = std::clamp(cosines[yi], -1.0, 1.0);
  const double cos_j = std::clamp(cosines[ji], -1.0, 1.0);
  const double sin_y = std::sqrt(std::max(0.0, 1.0 - cos_y * cos_y));
  const double cm = std::cos(margin);
  const double sm = std::sin(margin);
  const double target = cos_y * cm - sin_y * sm;  // cos(theta_y + m)
  const double d_target = sin_y > 0.0 ? cm + cos_y * sm / sin_y : cm;

  CurricularValue v;
  v.hard = target < cos_j;
  const double other = v.hard ? cos_j * (t + cos_j) : cos_j;
  const double d_other = v.hard ? t + 2.0 * cos_j : 1.0;

  Pair z{0.0, 0.0};
  z[yi] = scale * target;
  z[ji] = scale * other;
  v.modified_logits = z;
  const Pair p = softmax(z);
  v.loss = -std::log(std::max(p[yi], kProbFloor));
  v.grad[yi] = scale * (p[yi] - 1.0) * d_target;
  v.grad[ji] = scale * p[ji] * d_other;
  return v;
}

double curricular_update(double t, double mean_target_cos, double alpha) {
  return alpha * mean_target_cos + (1.0 - alpha) * t;
}

LossState initial_state(const LossSpec& spec) { return {spec.tau_value, 0.0}; }

SampleLoss evaluate_sample(const LossSpec& spec, const Pair& logits, const Pair& cosines, Label label,
                           const LossState& state) {
  static constexpr ClassWeights kUnit{1.0, 1.0};
  SampleLoss s;
  s.target_cos = cosines[class_index(label)];
  switch (spec.kind) {
    case LossKind::cce: {
      const LossGrad g = cce(softmax(logits), label, kUnit);
      s.raw = s.base_loss = g.loss;
      s.d_logits = g.grad;
      break;
    }
    case LossKind::focal: {
      const LossGrad g = focal(softmax(logits), label, spec.gamma, kUnit);
      s.raw = s.base_loss = g.loss;
      s.d_logits = g.grad;
      break;
    }
    case LossKind::gce: {
      const LossGrad g = gce(softmax(logits), label, spec.q, kUnit);
      s.raw = s.base_loss = g.loss;
      s.d_logits = g.grad;
      break;
    }
    case LossKind::super: {
      const LossGrad g = cce(softmax(logits), label, kUnit);
      const double tau = spec.tau_mode == TauMode::fixed ? spec.tau_value : state.tau;
      const SuperLossValue v = superloss(g.loss, tau, spec.lambda);
      s.base_loss = g.loss;
      s.raw = v.loss;
      s.d_logits = {v.sigma * g.grad[0], v.sigma * g.grad[1]};
      s.branch = (g.loss - tau) / spec.lambda < -2.0 * kInvE;
      break;
    }
    case LossKind::curricular: {
      const CurricularValue v = curricular(cosines, label, spec.margin, spec.scale, state.t);
      s.raw = s.base_loss = v.loss;
      s.d_cos = v.grad;
      s.branch = v.hard;
      break;
    }
  }
  return s;
}

LossState update_state(const LossSpec& spec, const LossState& state, std::span<const SampleLoss> batch) {
  if (batch.empty()) return state;
  LossState next = state;
  if (spec.kind == LossKind::super && spec.tau_mode == TauMode::ema) {
    double mean = 0.0;
    for (const auto& s : batch) mean += s.base_loss;
    mean /= static_cast<double>(batch.size());
    next.tau = spec.tau_decay * state.tau + (1.0 - spec.tau_decay) * mean;
  }
  if (spec.kind == LossKind::curricular) {
    double mean = 0.0;
    for (const auto& s : batch) mean += s.target_cos;
    mean /= static_cast<double>(batch.size());
    next.t = curricular_update(state.t, mean, spec.t_alpha);
  }
  return next;
}

EpochRecord per_class_telemetry(std::span<const double> raw, std::span<const Label> labels,
                                const ClassWeights& weights, int epoch) {
  if (raw.size() != labels.size()) throw std::invalid_argument("loss and label counts differ");
  if (raw.empty()) throw std::invalid_argument("epoch has no samples");
  EpochRecord r;
  r.epoch = epoch;
  double sum_b = 0.0, sum_s = 0.0, weighted = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (labels[i] == Label::bonafide) {
      sum_b += raw[i];
      ++r.n_bonafide;
    } else {
      sum_s += raw[i];
      ++r.n_spoof;
    }
    weighted += weights[labels[i]] * raw[i];
  }
  if (r.n_bonafide > 0) r.bonafide_raw = sum_b / static_cast<double>(r.n_bonafide);
  if (r.n_spoof > 0) r.spoof_raw = sum_s / static_cast<double>(r.n_spoof);
  r.weighted = weighted / static_cast<double>(raw.size());
  return r;
}

std::string to_csv(const LossTelemetry& telemetry) {
  auto cell = [](const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); };
  std::string out = "epoch,loss_bona_raw,loss_spf_raw,loss_weighted,tau,t\n";
  for (const auto& r : telemetry.epochs) {
    out += fmt::format("{},{},{},{},{},{}\n", r.epoch, cell(r.bonafide_raw), cell(r.spoof_raw), r.weighted,
                       cell(r.tau), cell(r.t));
  }
  return out;
}

}  // namespace spoofprobe
