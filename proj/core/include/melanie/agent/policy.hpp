#pragma once

#include <random>

#include "melanie/graph/network.hpp"
#include "melanie/nn/model.hpp"

namespace melanie::agent {

// With probability 1 - epsilon the highest-probability selectable viewer
// (lowest index on ties); otherwise a uniform draw over selectable viewers.
// Always consumes one coin flip from rng, plus one more when exploring.
graph::ViewerId select_action(const nn::Vector& dist, double epsilon, const nn::ActionMask& mask,
                              std::mt19937_64& rng);

graph::ViewerId greedy_action(const nn::Vector& dist, const nn::ActionMask& mask);

// epsilon(step) = max(end, start * decay^step)
struct EpsilonSchedule {
  double start{0.5};
  double end{0.01};
  double decay{0.995};

  double at(long step) const;
};

}  // namespace melanie::agent
