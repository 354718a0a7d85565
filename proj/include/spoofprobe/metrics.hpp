#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spoofprobe {

struct ScoreSet {
  std::vector<double> bonafide;
  std::vector<double> spoof;
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// Operating points at every distinct score t (plus both infinities):
// FRR(t) = #{bona < t}/n_b, FAR(t) = #{spoof >= t}/n_s. The EER is where the
// piecewise-linear FRR/FAR path crosses FRR = FAR. Throws
// std::invalid_argument when a class is empty.
EerResult compute_eer(const ScoreSet& scores);

inline constexpr double kInfiniteRatio = std::numeric_limits<double>::infinity();

// |O - Te_B| / |O - Te_S|; +inf when Te_S == O. Throws std::domain_error
// when eer_o is zero.
double intervention_ratio(double eer_o, double eer_te_b, double eer_te_s);

std::string format_percent(double fraction);

}  // namespace spoofprobe
