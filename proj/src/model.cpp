#include "spoofprobe/model.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>

#include "spoofprobe/hash.hpp"
#include "spoofprobe/rng.hpp"

namespace spoofprobe {
namespace {

constexpr double kNormEps = 1e-12;
constexpr int kCheckpointVersion = 1;

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + " contains non-finite values");
  }
}

}  // namespace

ParamLayout::ParamLayout(ModelShape s) : shape(s) {
  if (s.input < 1 || s.hidden < 1 || s.embedding < 1) throw std::invalid_argument("layer sizes must be positive");
  std::size_t at = 0;
  auto take = [&at](std::size_t n) {
    const std::size_t start = at;
    at += n;
    return start;
  };
  const auto in = static_cast<std::size_t>(s.input);
  const auto hid = static_cast<std::size_t>(s.hidden);
  const auto emb = static_cast<std::size_t>(s.embedding);
  w1 = take(hid * in);
  b1 = take(hid);
  w2 = take(emb * hid);
  b2 = take(emb);
  w3 = take(2 * emb);
  b3 = take(2);
  classes = take(2 * emb);
  total = at;
}

ModelParams init_params(ModelShape shape, const FeatureConfig& features, int sample_rate_hz,
                        std::uint64_t seed) {
  const ParamLayout l(shape);
  ModelParams p;
  p.features = features;
  p.sample_rate_hz = sample_rate_hz;
  p.shape = shape;
  p.feature_mean.assign(static_cast<std::size_t>(shape.input), 0.0);
  p.feature_scale.assign(static_cast<std::size_t>(shape.input), 1.0);
  p.weights.assign(l.total, 0.0);

  Rng rng(seed);
  auto fill = [&](std::size_t offset, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    const auto n = static_cast<std::size_t>(fan_in) * static_cast<std::size_t>(fan_out);
    for (std::size_t i = 0; i < n; ++i) p.weights[offset + i] = rng.uniform(-limit, limit);
  };
  fill(l.w1, shape.input, shape.hidden);
  fill(l.w2, shape.hidden, shape.embedding);
  fill(l.w3, shape.embedding, 2);

  // Orthonormal class vectors by Gram-Schmidt on Gaussian draws.
  const auto emb = static_cast<std::size_t>(shape.embedding);
  double* c0 = &p.weights[l.classes];
  double* c1 = c0 + emb;
  for (std::size_t i = 0; i < emb; ++i) c0[i] = rng.normal();
  for (std::size_t i = 0; i < emb; ++i) c1[i] = rng.normal();
  auto dot = [emb](const double* a, const double* b) {
    double s = 0.0;
    for (std::size_t i = 0; i < emb; ++i) s += a[i] * b[i];
    return s;
  };
  const double n0 = std::sqrt(dot(c0, c0));
  for (std::size_t i = 0; i < emb; ++i) c0[i] /= n0;
  if (emb > 1) {
    const double proj = dot(c0, c1);
    for (std::size_t i = 0; i < emb; ++i) c1[i] -= proj * c0[i];
  }
  const double n1 = std::sqrt(dot(c1, c1));
  for (std::size_t i = 0; i < emb; ++i) c1[i] /= n1;
  return p;
}

ForwardOut forward(const ModelParams& p, std::span<const double> x) {
  const ParamLayout l = p.layout();
  const auto in = static_cast<std::size_t>(p.shape.input);
  const auto hid = static_cast<std::size_t>(p.shape.hidden);
  const auto emb = static_cast<std::size_t>(p.shape.embedding);
  if (x.size() != in) {
    throw std::invalid_argument("feature dimension " + std::to_string(x.size()) + " does not match model input " +
                                std::to_string(in));
  }
  if (p.weights.size() != l.total) throw std::invalid_argument("parameter vector does not match layout");
  const double* w = p.weights.data();

  ForwardOut f;
  f.standardized.resize(in);
  for (std::size_t i = 0; i < in; ++i) f.standardized[i] = (x[i] - p.feature_mean[i]) / p.feature_scale[i];

  f.hidden_pre.resize(hid);
  f.hidden.resize(hid);
  for (std::size_t h = 0; h < hid; ++h) {
    double acc = w[l.b1 + h];
    const double* row = w + l.w1 + h * in;
    for (std::size_t i = 0; i < in; ++i) acc += row[i] * f.standardized[i];
    f.hidden_pre[h] = acc;
    f.hidden[h] = acc > 0.0 ? acc : 0.0;
  }

  f.embedding_pre.resize(emb);
  f.embedding.resize(emb);
  double sq = 0.0;
  for (std::size_t e = 0; e < emb; ++e) {
    double acc = w[l.b2 + e];
    const double* row = w + l.w2 + e * hid;
    for (std::size_t h = 0; h < hid; ++h) acc += row[h] * f.hidden[h];
    f.embedding_pre[e] = acc;
    f.embedding[e] = acc > 0.0 ? acc : 0.0;
    sq += f.embedding[e] * f.embedding[e];
  }
  f.embedding_norm = std::sqrt(sq);

  for (std::size_t c = 0; c < 2; ++c) {
    double acc = w[l.b3 + c];
    const double* row = w + l.w3 + c * emb;
    for (std::size_t e = 0; e < emb; ++e) acc += row[e] * f.embedding[e];
    f.logits[c] = acc;

    const double* cv = w + l.classes + c * emb;
    double d = 0.0, cn = 0.0;
    for (std::size_t e = 0; e < emb; ++e) {
      d += f.embedding[e] * cv[e];
      cn += cv[e] * cv[e];
    }
    const double denom = std::max(f.embedding_norm, kNormEps) * std::max(std::sqrt(cn), kNormEps);
    f.cosines[c] = std::clamp(d / denom, -1.0, 1.0);
  }
  return f;
}

void backward(const ModelParams& p, const ForwardOut& f, const Pair& d_logits, const Pair& d_cos,
              std::span<double> grad) {
  const ParamLayout l = p.layout();
  const auto in = static_cast<std::size_t>(p.shape.input);
  const auto hid = static_cast<std::size_t>(p.shape.hidden);
  const auto emb = static_cast<std::size_t>(p.shape.embedding);
  const double* w = p.weights.data();
  double* g = grad.data();

  std::vector<double> d_emb(emb, 0.0);
  for (std::size_t c = 0; c < 2; ++c) {
    if (d_logits[c] != 0.0) {
      g[l.b3 + c] += d_logits[c];
      for (std::size_t e = 0; e < emb; ++e) {
        g[l.w3 + c * emb + e] += d_logits[c] * f.embedding[e];
        d_emb[e] += d_logits[c] * w[l.w3 + c * emb + e];
      }
    }
    if (d_cos[c] != 0.0 && f.embedding_norm > kNormEps) {
      const double* cv = w + l.classes + c * emb;
      double cn = 0.0;
      for (std::size_t e = 0; e < emb; ++e) cn += cv[e] * cv[e];
      cn = std::sqrt(cn);
      const double en = f.embedding_norm;
      const double cos = f.cosines[c];
      for (std::size_t e = 0; e < emb; ++e) {
        const double u = f.embedding[e] / en;
        const double v = cv[e] / cn;
        d_emb[e] += d_cos[c] * (v - cos * u) / en;
        g[l.classes + c * emb + e] += d_cos[c] * (u - cos * v) / cn;
      }
    }
  }

  std::vector<double> d_hidden(hid, 0.0);
  for (std::size_t e = 0; e < emb; ++e) {
    if (f.embedding_pre[e] <= 0.0) continue;
    const double dz = d_emb[e];
    g[l.b2 + e] += dz;
    for (std::size_t h = 0; h < hid; ++h) {
      g[l.w2 + e * hid + h] += dz * f.hidden[h];
      d_hidden[h] += dz * w[l.w2 + e * hid + h];
    }
  }

  for (std::size_t h = 0; h < hid; ++h) {
    if (f.hidden_pre[h] <= 0.0) continue;
    const double dz = d_hidden[h];
    g[l.b1 + h] += dz;
    for (std::size_t i = 0; i < in; ++i) g[l.w1 + h * in + i] += dz * f.standardized[i];
  }
}

double score_features(const ModelParams& p, std::span<const double> features) {
  const ForwardOut f = forward(p, features);
  if (p.head == ScoreHead::cosine) return p.cos_scale * (f.cosines[0] - f.cosines[1]);
  return f.logits[0] - f.logits[1];
}

double score(const ModelParams& p, const Waveform& w) {
  return score_features(p, FeatureExtractor(p.features, p.sample_rate_hz).extract(w));
}

std::string to_checkpoint(const ModelParams& p) {
  check_finite(p.weights, "model parameters");
  nlohmann::ordered_json j;
  j["format"] = "spoofprobe-checkpoint";
  j["version"] = kCheckpointVersion;
  j["features"] = {{"fft_size", p.features.fft_size},
                   {"hop", p.features.hop},
                   {"n_mel_bands", p.features.n_mel_bands},
                   {"log_floor", p.features.log_floor}};
  j["sample_rate_hz"] = p.sample_rate_hz;
  j["shape"] = {{"input", p.shape.input}, {"hidden", p.shape.hidden}, {"embedding", p.shape.embedding}};
  j["head"] = p.head == ScoreHead::cosine ? "cosine" : "logits";
  j["cos_scale"] = p.cos_scale;
  j["feature_mean"] = p.feature_mean;
  j["feature_scale"] = p.feature_scale;
  j["weights"] = p.weights;
  return j.dump() + "\n";
}

ModelParams from_checkpoint(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("format", "") != "spoofprobe-checkpoint") throw std::runtime_error("not a spoofprobe checkpoint");
  if (j.at("version").get<int>() != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(j.at("version").get<int>()));
  }
  ModelParams p;
  const auto& fc = j.at("features");
  p.features.fft_size = fc.at("fft_size").get<int>();
  p.features.hop = fc.at("hop").get<int>();
  p.features.n_mel_bands = fc.at("n_mel_bands").get<int>();
  p.features.log_floor = fc.at("log_floor").get<double>();
  p.sample_rate_hz = j.at("sample_rate_hz").get<int>();
  const auto& sh = j.at("shape");
  p.shape = {sh.at("input").get<int>(), sh.at("hidden").get<int>(), sh.at("embedding").get<int>()};
  const std::string head = j.at("head").get<std::string>();
  if (head != "cosine" && head != "logits") throw std::runtime_error("unknown score head '" + head + "'");
  p.head = head == "cosine" ? ScoreHead::cosine : ScoreHead::logits;
  p.cos_scale = j.at("cos_scale").get<double>();
  p.feature_mean = j.at("feature_mean").get<std::vector<double>>();
  p.feature_scale = j.at("feature_scale").get<std::vector<double>>();
  p.weights = j.at("weights").get<std::vector<double>>();
  validate(p.features);
  if (p.weights.size() != ParamLayout(p.shape).total ||
      p.feature_mean.size() != static_cast<std::size_t>(p.shape.input) ||
      p.feature_scale.size() != static_cast<std::size_t>(p.shape.input)) {
    throw std::runtime_error("checkpoint parameter counts do not match its shape");
  }
  return p;
}

void save_checkpoint(const std::filesystem::path& file, const ModelParams& p) {
  write_file(file, to_checkpoint(p));
}

ModelParams load_checkpoint(const std::filesystem::path& file) { return from_checkpoint(read_file(file)); }

}  // namespace spoofprobe
