#include "melanie/harness/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace melanie::harness {
namespace {

void require_nonempty(std::span<const Prediction> pairs) {
  if (pairs.empty()) throw std::invalid_argument("metric of an empty prediction set");
}

}  // namespace

double mse(std::span<const Prediction> pairs) {
  require_nonempty(pairs);
  double s = 0.0;
  for (const Prediction& p : pairs) s += (p.q - p.r) * (p.q - p.r);
  return s / static_cast<double>(pairs.size());
}

double rmse(std::span<const Prediction> pairs) { return std::sqrt(mse(pairs)); }

double mae(std::span<const Prediction> pairs) {
  require_nonempty(pairs);
  double s = 0.0;
  for (const Prediction& p : pairs) s += std::abs(p.q - p.r);
  return s / static_cast<double>(pairs.size());
}

std::vector<CurvePoint> average_reward_curve(std::span<const env::MinuteReward> minutes, int N) {
  if (N <= 0) throw std::invalid_argument("average_reward_curve: N must be > 0");
  std::vector<CurvePoint> out;
  for (const env::MinuteReward& m : minutes) {
    if (m.count == 0) continue;
    out.push_back({m.minute, m.sum / static_cast<double>(N)});
  }
  return out;
}

}  // namespace melanie::harness
