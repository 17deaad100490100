#include "melanie/agent/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace melanie::agent {

graph::ViewerId greedy_action(const nn::Vector& dist, const nn::ActionMask& mask) {
  if (static_cast<std::size_t>(dist.size()) != mask.size()) {
    throw std::invalid_argument("select_action: distribution and mask lengths differ");
  }
  Eigen::Index best = -1;
  for (Eigen::Index i = 0; i < dist.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    if (best < 0 || dist(i) > dist(best)) best = i;
  }
  if (best < 0) throw std::invalid_argument("select_action: no selectable viewer");
  return static_cast<graph::ViewerId>(best);
}

graph::ViewerId select_action(const nn::Vector& dist, double epsilon, const nn::ActionMask& mask,
                              std::mt19937_64& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("select_action: epsilon outside [0,1]");
  }
  const graph::ViewerId greedy = greedy_action(dist, mask);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) >= epsilon) return greedy;
  std::vector<graph::ViewerId> selectable;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) selectable.push_back(static_cast<graph::ViewerId>(i));
  }
  std::uniform_int_distribution<std::size_t> pick(0, selectable.size() - 1);
  return selectable[pick(rng)];
}

double EpsilonSchedule::at(long step) const {
  return std::max(end, start * std::pow(decay, static_cast<double>(step)));
}

}  // namespace melanie::agent
