#include "spoofprobe/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spoofprobe {

EerResult compute_eer(const ScoreSet& scores) {
  if (scores.bonafide.empty() || scores.spoof.empty()) {
    throw std::invalid_argument("EER needs at least one bonafide and one spoof score");
  }
  std::vector<double> bona = scores.bonafide;
  std::vector<double> spoof = scores.spoof;
  std::sort(bona.begin(), bona.end());
  std::sort(spoof.begin(), spoof.end());
  std::vector<double> thresholds;
  thresholds.reserve(bona.size() + spoof.size());
  std::merge(bona.begin(), bona.end(), spoof.begin(), spoof.end(), std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const auto nb = static_cast<double>(bona.size());
  const auto ns = static_cast<double>(spoof.size());
  struct Point {
    double t, frr, far;
  };
  std::vector<Point> pts;
  pts.reserve(thresholds.size() + 2);
  pts.push_back({-std::numeric_limits<double>::infinity(), 0.0, 1.0});
  for (double t : thresholds) {
    const auto below = std::lower_bound(bona.begin(), bona.end(), t) - bona.begin();
    const auto spoof_below = std::lower_bound(spoof.begin(), spoof.end(), t) - spoof.begin();
    pts.push_back({t, static_cast<double>(below) / nb, (ns - static_cast<double>(spoof_below)) / ns});
  }
  pts.push_back({std::numeric_limits<double>::infinity(), 1.0, 0.0});

  // FAR - FRR is non-increasing along the sweep: 1 at -inf, -1 at +inf.
  for (std::size_t k = 1; k < pts.size(); ++k) {
    const double d = pts[k].far - pts[k].frr;
    if (d > 0.0) continue;
    if (d == 0.0) return {pts[k].frr, pts[k].t};
    const Point& a = pts[k - 1];
    const Point& b = pts[k];
    const double da = a.far - a.frr;
    const double lambda = da / (da - d);
    double threshold;
    if (std::isfinite(a.t) && std::isfinite(b.t)) threshold = a.t + lambda * (b.t - a.t);
    else threshold = std::isfinite(a.t) ? a.t : b.t;
    return {a.frr + lambda * (b.frr - a.frr), threshold};
  }
  throw std::logic_error("EER sweep did not cross");
}

double intervention_ratio(double eer_o, double eer_te_b, double eer_te_s) {
  if (eer_o == 0.0) throw std::domain_error("impact ratio is undefined when the baseline EER is zero");
  const double num = std::abs(eer_o - eer_te_b);
  const double den = std::abs(eer_o - eer_te_s);
  if (den == 0.0) return kInfiniteRatio;
  return num / den;
}

std::string format_percent(double fraction) { return fmt::format("{:.2f}", 100.0 * fraction); }

}  // namespace spoofprobe
