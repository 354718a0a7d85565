#include "spoofprobe/train.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "spoofprobe/parallel.hpp"
#include "spoofprobe/rng.hpp"
#include "spoofprobe/wav_io.hpp"

namespace spoofprobe {
namespace {

ScoreHead head_for(LossKind kind) { return kind == LossKind::curricular ? ScoreHead::cosine : ScoreHead::logits; }

// Objective value plus the activation/branch pattern it was evaluated on.
struct Evaluation {
  double objective = 0.0;
  std::vector<bool> pattern;
};

Evaluation evaluate_batch(const ModelParams& p, const std::vector<Example>& batch, const LossSpec& spec,
                          const LossState& state, std::span<double> grad) {
  Evaluation ev;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const Example& ex : batch) {
    const ForwardOut f = forward(p, ex.features);
    const SampleLoss s = evaluate_sample(spec, f.logits, f.cosines, ex.label, state);
    const double w = spec.weights[ex.label];
    ev.objective += w * s.raw * inv_n;
    for (double z : f.hidden_pre) ev.pattern.push_back(z > 0.0);
    for (double z : f.embedding_pre) ev.pattern.push_back(z > 0.0);
    ev.pattern.push_back(s.branch);
    if (!grad.empty()) {
      const double k = w * inv_n;
      backward(p, f, {k * s.d_logits[0], k * s.d_logits[1]}, {k * s.d_cos[0], k * s.d_cos[1]}, grad);
    }
  }
  return ev;
}

}  // namespace

void validate(const TrainConfig& tc) {
  if (tc.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (tc.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(tc.learning_rate >= 0.0) || !std::isfinite(tc.learning_rate)) {
    throw std::invalid_argument("learning_rate must be finite and non-negative");
  }
  if (!(tc.momentum >= 0.0 && tc.momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
  validate(tc.loss);
  validate(tc.features);
}

TrainResult train_examples(const std::vector<Example>& examples, const TrainConfig& tc, int sample_rate_hz) {
  validate(tc);
  std::size_t n_bona = 0;
  for (const auto& ex : examples) n_bona += ex.label == Label::bonafide ? 1 : 0;
  if (n_bona == 0 || n_bona == examples.size()) {
    throw std::invalid_argument("training set must contain both classes");
  }
  const std::size_t dim = examples.front().features.size();
  for (const auto& ex : examples) {
    if (ex.features.size() != dim) throw std::invalid_argument("inconsistent feature dimensions");
  }

  ModelShape shape = tc.shape;
  shape.input = static_cast<int>(dim);
  ModelParams p = init_params(shape, tc.features, sample_rate_hz, derive_seed(tc.seed, "init"));
  p.head = head_for(tc.loss.kind);
  p.cos_scale = tc.loss.scale;

  const auto n = static_cast<double>(examples.size());
  for (std::size_t d = 0; d < dim; ++d) {
    double mean = 0.0;
    for (const auto& ex : examples) mean += ex.features[d];
    mean /= n;
    double var = 0.0;
    for (const auto& ex : examples) var += (ex.features[d] - mean) * (ex.features[d] - mean);
    const double sd = std::sqrt(var / n);
    p.feature_mean[d] = mean;
    p.feature_scale[d] = sd > 1e-8 ? sd : 1.0;
  }

  TrainResult result;
  LossState state = initial_state(tc.loss);
  std::vector<double> velocity(p.weights.size(), 0.0);
  std::vector<double> grad(p.weights.size());
  std::vector<std::size_t> order(examples.size());
  const std::uint64_t shuffle_seed = derive_seed(tc.seed, "shuffle");
  const auto batch_size = static_cast<std::size_t>(tc.batch_size);

  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(shuffle_seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    std::vector<double> raw;
    std::vector<Label> labels;
    raw.reserve(order.size());
    labels.reserve(order.size());
    std::vector<SampleLoss> batch_losses;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      const double inv_n = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      batch_losses.clear();
      for (std::size_t b = start; b < end; ++b) {
        const Example& ex = examples[order[b]];
        const ForwardOut f = forward(p, ex.features);
        const SampleLoss s = evaluate_sample(tc.loss, f.logits, f.cosines, ex.label, state);
        const double k = tc.loss.weights[ex.label] * inv_n;
        backward(p, f, {k * s.d_logits[0], k * s.d_logits[1]}, {k * s.d_cos[0], k * s.d_cos[1]}, grad);
        raw.push_back(s.raw);
        labels.push_back(ex.label);
        batch_losses.push_back(s);
      }
      state = update_state(tc.loss, state, batch_losses);
      for (std::size_t i = 0; i < p.weights.size(); ++i) {
        velocity[i] = tc.momentum * velocity[i] - tc.learning_rate * grad[i];
        p.weights[i] += velocity[i];
      }
    }

    EpochRecord rec = per_class_telemetry(raw, labels, tc.loss.weights, epoch);
    if (tc.loss.kind == LossKind::super) {
      rec.tau = tc.loss.tau_mode == TauMode::fixed ? tc.loss.tau_value : state.tau;
    }
    if (tc.loss.kind == LossKind::curricular) rec.t = state.t;
    result.telemetry.epochs.push_back(rec);
  }
  for (double v : p.weights) {
    if (!std::isfinite(v)) throw std::runtime_error("training diverged (non-finite parameters)");
  }
  result.params = std::move(p);
  return result;
}

std::vector<Example> load_examples(const Manifest& manifest, const FeatureConfig& features) {
  const auto& entries = manifest.entries();
  std::vector<Example> out(entries.size());
  parallel_for(entries.size(), [&](std::size_t i) {
    const Waveform w = read_wav(entries[i].audio_path);
    out[i] = {FeatureExtractor(features, w.sample_rate_hz).extract(w), entries[i].label};
  });
  return out;
}

TrainResult train(const Manifest& train_manifest, const TrainConfig& tc) {
  if (train_manifest.empty()) throw std::invalid_argument("training manifest is empty");
  const int rate = read_wav(train_manifest.entries().front().audio_path).sample_rate_hz;
  return train_examples(load_examples(train_manifest, tc.features), tc, rate);
}

double batch_objective(const ModelParams& p, const std::vector<Example>& batch, const LossSpec& spec,
                       const LossState& state) {
  return evaluate_batch(p, batch, spec, state, {}).objective;
}

GradCheckResult grad_check(const ModelParams& p, const std::vector<Example>& batch, const LossSpec& spec,
                           const LossState& state, std::size_t n_coords, std::uint64_t seed, double h,
                           double denominator_floor) {
  if (batch.empty()) throw std::invalid_argument("grad_check needs a non-empty batch");
  std::vector<double> analytic(p.weights.size(), 0.0);
  const Evaluation base = evaluate_batch(p, batch, spec, state, analytic);

  std::vector<std::size_t> coords(p.weights.size());
  std::iota(coords.begin(), coords.end(), 0);
  if (n_coords != 0 && n_coords < coords.size()) {
    Rng rng(seed);
    for (std::size_t i = 0; i < n_coords; ++i) std::swap(coords[i], coords[i + rng.below(coords.size() - i)]);
    coords.resize(n_coords);
  }

  GradCheckResult r;
  ModelParams q = p;
  for (std::size_t c : coords) {
    const double orig = q.weights[c];
    q.weights[c] = orig + h;
    const Evaluation plus = evaluate_batch(q, batch, spec, state, {});
    q.weights[c] = orig - h;
    const Evaluation minus = evaluate_batch(q, batch, spec, state, {});
    q.weights[c] = orig;
    if (plus.pattern != base.pattern || minus.pattern != base.pattern) {
      ++r.skipped;
      continue;
    }
    const double numeric = (plus.objective - minus.objective) / (2.0 * h);
    const double a = analytic[c];
    const double denom = std::max({std::abs(a), std::abs(numeric), denominator_floor});
    r.max_rel_error = std::max(r.max_rel_error, std::abs(a - numeric) / denom);
    ++r.checked;
  }
  return r;
}

}  // namespace spoofprobe
