#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <vector>

#include "melanie/agent/replay.hpp"
#include "melanie/env/environment.hpp"
#include "melanie/nn/model.hpp"
#include "melanie/nn/parameters.hpp"

namespace melanie::env {

// Callbacks driven by rollout(). The referenced parameters may be updated
// from on_minute_end; the next minute then acts under the new values.
struct RolloutHooks {
  // Exploration rate for the n-th action of the rollout. Null means greedy.
  std::function<double(std::size_t)> epsilon;
  std::function<void(const agent::Transition&)> on_transition;
  // Called after the last action of each minute. Returning false stops.
  std::function<bool(int minute)> on_minute_end;
};

// Resets env and plays it to the end (or until a hook stops it). The event
// signature is recomputed at the start of every minute over all viewers of
// the event.
void rollout(StreamingEnvironment& env, const nn::ParameterSet& params,
             const nn::EncoderOptions& encoder, std::mt19937_64& rng, const RolloutHooks& hooks);

struct MinuteReward {
  int minute{0};
  double sum{0.0};
  std::size_t count{0};
};

struct Episode {
  std::vector<agent::Transition> transitions;
  std::vector<MinuteReward> minutes;  // ascending, only minutes with actions
  std::size_t mismatches{0};
};

Episode run_episode(StreamingEnvironment& env, const nn::ParameterSet& params, double epsilon,
                    std::uint64_t seed, const nn::EncoderOptions& encoder = {});

// minute,viewer,chosen,reward,priority
void write_trajectory_csv(const std::filesystem::path& file,
                          const std::vector<agent::Transition>& transitions);

}  // namespace melanie::env
