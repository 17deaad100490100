#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "melanie/agent/losses.hpp"
#include "melanie/env/environment.hpp"
#include "melanie/graph/network.hpp"
#include "melanie/nn/model.hpp"
#include "melanie/nn/parameters.hpp"

namespace melanie::agent {

struct TrainConfig {
  double eta{0.05};  // step size
  double gamma{0.9};  // used only with bootstrap
  double epsilon_start{0.5};
  double epsilon_end{0.01};
  double epsilon_decay{0.995};
  std::size_t K{32};
  std::size_t replay_capacity{256};  // D
  int adaptation_steps{5};
  int update_every_minutes{1};
  std::uint64_t seed{0};
  bool use_kl_priority{true};  // false: uniform sampling of K transitions
  bool bootstrap{false};
  std::size_t histogram_bins{10};
  double laplace_alpha{1.0};
  double max_grad_norm{0.0};  // per-loss gradient clipping, 0 disables
  nn::EncoderOptions encoder{};
};

void validate(const TrainConfig& config);

struct AdaptationStep {
  int step{0};
  double actor_loss{0.0};
  double critic_loss{0.0};
  double mean_priority{0.0};
  double epsilon{0.0};
};

struct AdaptationResult {
  nn::ParameterSet params;
  std::vector<AdaptationStep> log;
  std::size_t transitions{0};
  std::size_t skipped{0};
};

LossContext loss_context(const TrainConfig& config, const env::StreamingEnvironment& env);

/*
 * Few-step adaptation of a copy of `global` on one task.
 *
 * Plays env (normally the task's support phase) minute by minute with an
 * epsilon-greedy policy, recording rewards and pushing transitions into a
 * fresh replay buffer. Every update_every_minutes minutes it samples K
 * transitions and takes one SGD step on the actor and critic losses, both
 * gradients taken at the same parameters. Stops after adaptation_steps
 * steps or when the environment is exhausted. `global` is never modified.
 */
AdaptationResult adapt_task(const nn::ParameterSet& global, const graph::Task& task,
                            const TrainConfig& config, env::StreamingEnvironment& env);

// step,actor_loss,critic_loss,mean_priority,epsilon
void write_adaptation_log(const std::filesystem::path& file,
                          const std::vector<AdaptationStep>& log);

}  // namespace melanie::agent
