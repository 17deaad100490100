#pragma once

#include <span>
#include <vector>

#include "melanie/env/episode.hpp"

namespace melanie::harness {

// Critic estimate and realized reward for one query interaction.
struct Prediction {
  double q{0.0};
  double r{0.0};
};

// All three reject an empty input. rmse is exactly sqrt(mse).
double mse(std::span<const Prediction> pairs);
double rmse(std::span<const Prediction> pairs);
double mae(std::span<const Prediction> pairs);

struct CurvePoint {
  int minute{0};
  double reward{0.0};
};

// r^t = (sum of rewards in minute t) / N for each minute that has at least
// one reward. Throws when N <= 0.
std::vector<CurvePoint> average_reward_curve(std::span<const env::MinuteReward> minutes, int N);

}  // namespace melanie::harness
