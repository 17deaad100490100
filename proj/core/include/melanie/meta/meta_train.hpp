#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "melanie/agent/adaptation.hpp"
#include "melanie/env/environment.hpp"
#include "melanie/meta/signature_buffer.hpp"
#include "melanie/nn/parameters.hpp"

namespace melanie::meta {

struct MetaConfig {
  double meta_eta{0.05};        // outer step size
  double signature_lambda{1.0};  // +1 minimizes divergence, -1 maximizes it
  int epochs{10};
  int tasks_per_epoch{0};        // 0 means every training task
  std::size_t signature_buffer_capacity{32};  // C
  bool use_signature_buffer{true};
  double query_epsilon{0.1};     // exploration while collecting query transitions
  int patience{3};               // epochs without validation improvement
  double max_grad_norm{0.0};     // meta-gradient clipping, 0 disables
  std::string optimizer{"sgd"};  // outer update: "sgd" or "adam"
  bool freeze_embeddings_per_task{false};  // meta updates leave X at its initial values
  std::uint64_t seed{0};
};

void validate(const MetaConfig& config);

// Builds the environment for one phase of a task. The seed only matters for
// generative environments.
using EnvironmentFactory =
    std::function<env::StreamingEnvironment(const graph::Task&, env::Phase, std::uint64_t seed)>;

// Score of candidate global parameters on held-out tasks; lower is better.
using ValidationScore = std::function<double(const nn::ParameterSet&)>;

struct MetaEpochRecord {
  int epoch{0};
  std::string task_id;
  double inner_actor_loss{0.0};
  double inner_critic_loss{0.0};
  double meta_actor_loss{0.0};
  double meta_critic_loss{0.0};
  double mean_signature_divergence{0.0};
};

struct MetaTrainResult {
  nn::ParameterSet params;  // best validation epoch, or the last one
  SignatureBuffer buffer;
  std::vector<MetaEpochRecord> log;
  std::vector<double> validation;  // one score per epoch when provided
  int epochs_run{0};
  int best_epoch{0};
};

/*
 * First-order meta-training.
 *
 * Per epoch the training tasks are visited in a fresh uniform order. For
 * each task: adapt a copy of the global parameters on the support phase,
 * play the query phase under the adapted parameters, take the gradient of
 * both meta losses at the adapted parameters and apply it to the global
 * parameters, then store the adapted signature. With a validation callback,
 * training stops after `patience` epochs without improvement and the best
 * epoch's parameters are returned.
 */
MetaTrainResult meta_train(const std::vector<graph::Task>& tasks, const MetaConfig& config,
                           const agent::TrainConfig& train, const nn::NetworkDims& dims,
                           const EnvironmentFactory& make_env,
                           const ValidationScore& validation = {},
                           std::optional<nn::ParameterSet> init = std::nullopt);

// epoch,task_id,inner_actor_loss,inner_critic_loss,meta_actor_loss,meta_critic_loss,mean_signature_divergence
void write_meta_log(const std::filesystem::path& file, const std::vector<MetaEpochRecord>& log);

}  // namespace melanie::meta
