#include <doctest.h>

#include <fmt/format.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "spoofprobe/losses.hpp"
#include "spoofprobe/rng.hpp"
#include "spoofprobe/train.hpp"

using namespace spoofprobe;

namespace {

constexpr ClassWeights kUnit{1.0, 1.0};

// Central-difference gradient of a scalar function of two logits.
template <typename F>
Pair fd_grad(F f, Pair z, double h = 1e-6) {
  Pair g{};
  for (int k = 0; k < 2; ++k) {
    Pair a = z, b = z;
    a[k] += h;
    b[k] -= h;
    g[k] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

double rel_err(double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6}); }

Pair probs_with_target(double p, Label label) {
  return label == Label::bonafide ? Pair{p, 1.0 - p} : Pair{1.0 - p, p};
}

}  // namespace

TEST_SUITE("losses") {

TEST_CASE("cce closed forms") {
  CHECK(cce({1.0, 0.0}, Label::bonafide, {0.9, 0.1}).loss == 0.0);
  CHECK(cce({0.5, 0.5}, Label::bonafide, {0.9, 0.1}).loss == doctest::Approx(0.9 * std::log(2.0)));
  CHECK(cce({0.5, 0.5}, Label::bonafide, {0.9, 0.1}).loss == doctest::Approx(0.6238).epsilon(1e-4));
  // Floor guards a zero probability.
  CHECK(cce({0.0, 1.0}, Label::bonafide, kUnit).loss == doctest::Approx(-std::log(1e-12)));
}

TEST_CASE("focal closed forms and reduction to cce") {
  CHECK(focal({1.0, 0.0}, Label::bonafide, 2.0, kUnit).loss == 0.0);
  CHECK(focal({0.5, 0.5}, Label::spoof, 2.0, kUnit).loss == doctest::Approx(0.25 * std::log(2.0)));
  CHECK(focal({0.5, 0.5}, Label::spoof, 2.0, kUnit).loss == doctest::Approx(0.1733).epsilon(1e-3));
  Rng r(1);
  for (int i = 0; i < 200; ++i) {
    const Pair z{3.0 * r.normal(), 3.0 * r.normal()};
    const Pair p = softmax(z);
    const Label lb = r.below(2) ? Label::spoof : Label::bonafide;
    const LossGrad a = focal(p, lb, 0.0, {0.9, 0.1});
    const LossGrad b = cce(p, lb, {0.9, 0.1});
    CHECK(std::abs(a.loss - b.loss) <= 1e-12);
    CHECK(std::abs(a.grad[0] - b.grad[0]) <= 1e-12);
    CHECK(std::abs(a.grad[1] - b.grad[1]) <= 1e-12);
  }
}

TEST_CASE("gce closed forms and small-q limit") {
  CHECK(gce({1.0, 0.0}, Label::bonafide, 0.7, kUnit).loss == 0.0);
  for (double p : {0.1, 0.4, 0.9}) {
    CHECK(gce(probs_with_target(p, Label::spoof), Label::spoof, 1.0, {0.9, 0.1}).loss ==
          doctest::Approx(0.1 * (1.0 - p)));
  }
  // The gap is about q*ln(p)^2/2, so the 1e-3 band needs p > exp(-sqrt(20)).
  for (double p = 0.02; p <= 1.0; p += 0.01) {
    const Pair probs = probs_with_target(p, Label::bonafide);
    CHECK(std::abs(gce(probs, Label::bonafide, 1e-4, kUnit).loss - cce(probs, Label::bonafide, kUnit).loss) <
          1e-3);
  }
}

TEST_CASE("softmax losses match finite differences through the softmax") {
  Rng r(2);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const Pair z{2.0 * r.normal(), 2.0 * r.normal()};
    const Label lb = r.below(2) ? Label::spoof : Label::bonafide;
    const ClassWeights w{0.9, 0.1};
    using Fn = std::function<LossGrad(const Pair&)>;
    const Fn fns[] = {
        [&](const Pair& p) { return cce(p, lb, w); },
        [&](const Pair& p) { return focal(p, lb, 2.0, w); },
        [&](const Pair& p) { return focal(p, lb, 0.5, w); },
        [&](const Pair& p) { return gce(p, lb, 0.7, w); },
        [&](const Pair& p) { return gce(p, lb, 0.2, w); },
    };
    for (const auto& f : fns) {
      const LossGrad g = f(softmax(z));
      const Pair n = fd_grad([&](const Pair& zz) { return f(softmax(zz)).loss; }, z);
      worst = std::max({worst, rel_err(g.grad[0], n[0]), rel_err(g.grad[1], n[1])});
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("losses are non-negative on valid probabilities") {
  Rng r(3);
  for (int i = 0; i < 500; ++i) {
    const Pair p = softmax({4.0 * r.normal(), 4.0 * r.normal()});
    const Label lb = r.below(2) ? Label::spoof : Label::bonafide;
    CHECK(cce(p, lb, {0.9, 0.1}).loss >= 0.0);
    CHECK(focal(p, lb, 2.0, {0.9, 0.1}).loss >= 0.0);
    CHECK(gce(p, lb, 0.7, {0.9, 0.1}).loss >= 0.0);
    const Pair cosines{std::tanh(r.normal()), std::tanh(r.normal())};
    CHECK(curricular(cosines, lb, 0.2, 8.0, 0.3).loss >= 0.0);
  }
}

TEST_CASE("lambert_w identities and residual grid") {
  CHECK(lambert_w(0.0) == 0.0);
  CHECK(lambert_w(std::numbers::e) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lambert_w(-1.0 / std::numbers::e) == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK_THROWS_AS(lambert_w(-0.4), std::domain_error);

  // Negative branch [-1/e, 0) sampled densely near the branch point, positive
  // side log-spaced up to 1e6. Residual is relative to max(1, |x|).
  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(-std::exp(-1.0) * std::pow(10.0, -12.0 * i / 200.0));
  for (int i = 0; i <= 400; ++i) grid.push_back(std::pow(10.0, -12.0 + 18.0 * i / 400.0));
  double worst = 0.0;
  for (double x : grid) {
    const double w = lambert_w(x);
    CHECK(w >= -1.0);
    worst = std::max(worst, std::abs(w * std::exp(w) - x) / std::max(1.0, std::abs(x)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("superloss fixed points, monotonicity and stationarity") {
  const SuperLossValue at_tau = superloss(0.7, 0.7, 1.0);
  CHECK(at_tau.sigma == 1.0);
  CHECK(at_tau.loss == 0.0);

  double prev = std::numeric_limits<double>::infinity();
  for (double l = 0.0; l < 20.0; l += 0.05) {
    const double s = superloss(l, std::log(2.0), 0.5).sigma;
    CHECK(s <= prev);
    prev = s;
  }
  CHECK(superloss(10.0, std::log(2.0), 1.0).sigma < 1.0);

  double worst = 0.0;
  for (double lambda : {0.25, 1.0, 3.0}) {
    for (double beta = -2.0 / std::numbers::e + 1e-3; beta < 30.0; beta += 0.1) {
      const double tau = 0.5;
      const double l = tau + beta * lambda;
      const double s = superloss(l, tau, lambda).sigma;
      auto f = [&](double sig) { return (l - tau) * sig + lambda * std::log(sig) * std::log(sig); };
      const double h = 1e-5 * s;
      worst = std::max(worst, std::abs((f(s + h) - f(s - h)) / (2.0 * h)));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("superloss derivative in the base loss equals sigma") {
  for (double l : {0.01, 0.3, 0.69, 1.5, 6.0}) {
    const double h = 1e-6;
    const double n = (superloss(l + h, 0.69, 1.0).loss - superloss(l - h, 0.69, 1.0).loss) / (2.0 * h);
    CHECK(rel_err(superloss(l, 0.69, 1.0).sigma, n) < 1e-6);
  }
}

TEST_CASE("curricular reductions and hard-branch modulation") {
  const double s = 8.0;
  Rng r(4);
  for (int i = 0; i < 100; ++i) {
    const double cy = 0.3 + 0.6 * r.uniform();
    const double cj = cy - 0.1 - 0.5 * r.uniform();
    const CurricularValue v = curricular({cy, cj}, Label::bonafide, 0.0, s, 0.0);
    CHECK_FALSE(v.hard);
    const Pair p = softmax({s * cy, s * cj});
    CHECK(v.loss == doctest::Approx(-std::log(p[0])).epsilon(1e-12));
  }
  // cos_y + margin falls below cos_j: the non-target cosine becomes 0.8 * 1.3.
  const CurricularValue hard = curricular({0.5, 0.8}, Label::bonafide, 0.2, s, 0.5);
  CHECK(hard.hard);
  CHECK(hard.modified_logits[1] == doctest::Approx(s * 1.04).epsilon(1e-12));
  CHECK(hard.modified_logits[0] == doctest::Approx(s * std::cos(std::acos(0.5) + 0.2)).epsilon(1e-12));
  CHECK_THROWS_AS(curricular({1.5, 0.0}, Label::bonafide, 0.2, s, 0.0), std::invalid_argument);
}

TEST_CASE("curricular gradient matches finite differences away from the branch") {
  Rng r(5);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const Pair c{0.9 * std::tanh(r.normal()), 0.9 * std::tanh(r.normal())};
    const Label lb = r.below(2) ? Label::spoof : Label::bonafide;
    const double t = r.uniform(-0.5, 0.5);
    const CurricularValue v = curricular(c, lb, 0.2, 8.0, t);
    const Pair n = fd_grad([&](const Pair& cc) { return curricular(cc, lb, 0.2, 8.0, t).loss; }, c);
    // Skip points within a step of the hard/easy switch.
    bool near = false;
    for (double d : {-1e-6, 1e-6}) {
      for (int k = 0; k < 2; ++k) {
        Pair cc = c;
        cc[k] += d;
        near |= curricular(cc, lb, 0.2, 8.0, t).hard != v.hard;
      }
    }
    if (near) continue;
    worst = std::max({worst, rel_err(v.grad[0], n[0]), rel_err(v.grad[1], n[1])});
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("curricular t stays inside [-1, 1]") {
  Rng r(6);
  double t = 0.0;
  for (int i = 0; i < 5000; ++i) {
    t = curricular_update(t, r.uniform(-1.0, 1.0), 0.01);
    CHECK(t >= -1.0);
    CHECK(t <= 1.0);
  }
  CHECK(curricular_update(0.0, 0.5, 0.1) == doctest::Approx(0.05));
}

TEST_CASE("batch state: tau follows an EMA of the base loss") {
  LossSpec spec;
  spec.kind = LossKind::super;
  LossState st = initial_state(spec);
  CHECK(st.tau == doctest::Approx(std::log(2.0)));
  std::vector<SampleLoss> batch(2);
  batch[0].base_loss = 1.0;
  batch[1].base_loss = 3.0;
  const LossState next = update_state(spec, st, batch);
  CHECK(next.tau == doctest::Approx(0.9 * std::log(2.0) + 0.1 * 2.0));
  spec.tau_mode = TauMode::fixed;
  CHECK(update_state(spec, st, batch).tau == st.tau);
}

TEST_CASE("evaluate_sample returns unweighted losses") {
  LossSpec spec;
  spec.weights = {0.9, 0.1};
  const Pair z{0.3, -0.2};
  const SampleLoss s = evaluate_sample(spec, z, {0.1, 0.2}, Label::spoof, initial_state(spec));
  CHECK(s.raw == doctest::Approx(-std::log(softmax(z)[1])));
}

TEST_CASE("per-class telemetry means and absence") {
  const std::vector<double> raw{1.0, 3.0, 2.0};
  const std::vector<Label> labels{Label::bonafide, Label::bonafide, Label::spoof};
  const EpochRecord e = per_class_telemetry(raw, labels, {0.9, 0.1}, 1);
  CHECK(*e.bonafide_raw == 2.0);
  CHECK(*e.spoof_raw == 2.0);
  CHECK(e.weighted == doctest::Approx((0.9 * 4.0 + 0.1 * 2.0) / 3.0));

  const std::vector<double> one{1.0, 2.0};
  const std::vector<Label> bona{Label::bonafide, Label::bonafide};
  const EpochRecord s = per_class_telemetry(one, bona, {0.9, 0.1}, 2);
  CHECK(s.bonafide_raw);
  CHECK_FALSE(s.spoof_raw);
  LossTelemetry t{{e, s}};
  CHECK(to_csv(t) ==
        "epoch,loss_bona_raw,loss_spf_raw,loss_weighted,tau,t\n"
        "1,2,2," + fmt::format("{}", e.weighted) + ",,\n"
        "2,1.5,," + fmt::format("{}", s.weighted) + ",,\n");
}

TEST_CASE("LossSpec validation") {
  LossSpec spec;
  spec.q = 0.0;
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec = LossSpec{};
  spec.q = 1.5;
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec = LossSpec{};
  spec.weights.spoof = 0.0;
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec = LossSpec{};
  spec.gamma = -1.0;
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  CHECK(parse_loss_kind("curricular") == LossKind::curricular);
  CHECK_THROWS_AS(parse_loss_kind("arcface"), std::invalid_argument);
}

TEST_CASE("model-level gradient checks for super and curricular") {
  Rng r(7);
  for (LossKind kind : {LossKind::super, LossKind::curricular}) {
    LossSpec spec;
    spec.kind = kind;
    LossState state = initial_state(spec);
    state.t = 0.3;
    for (int trial = 0; trial < 5; ++trial) {
      const ModelParams p = init_params(ModelShape{}, FeatureConfig{}, 16000, r.next_u64());
      std::vector<Example> batch;
      for (int i = 0; i < 8; ++i) {
        Example ex;
        for (int d = 0; d < 48; ++d) ex.features.push_back(r.normal());
        ex.label = r.below(2) ? Label::spoof : Label::bonafide;
        batch.push_back(ex);
      }
      const GradCheckResult g = grad_check(p, batch, spec, state, 300, r.next_u64());
      CHECK(g.checked > 250);
      CHECK(g.max_rel_error < 1e-4);
    }
  }
}

}  // TEST_SUITE
