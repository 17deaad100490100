#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "melanie/harness/config.hpp"
#include "melanie/harness/evaluation.hpp"
#include "melanie/meta/meta_train.hpp"

namespace melanie::harness {

// Events split in order into train / validation / test tasks. Networks are
// normalized for replay mode and kept raw for generative mode.
struct Dataset {
  std::vector<graph::Task> train;
  std::vector<graph::Task> validation;
  std::vector<graph::Task> test;
};

Dataset build_dataset(const RunConfig& config);
std::vector<graph::TemporalInteractionNetwork> generate_events(const DataConfig& data);

meta::EnvironmentFactory environment_factory(const RunConfig& config);

// One task's few-step adaptation followed by query evaluation.
struct TaskOutcome {
  EvalReport report;
  agent::AdaptationResult adaptation;
};

TaskOutcome adapt_and_evaluate(const nn::ParameterSet& global, const graph::Task& task,
                               const RunConfig& config, std::uint64_t seed);

struct SeedResult {
  std::uint64_t seed{0};
  std::vector<EvalReport> reports;  // one per test task
  double rmse{0.0};                 // means over test tasks
  double mae{0.0};
  double mse{0.0};
  int meta_epochs{0};
};

// Global parameters for one seed: meta-trained for meta variants, a fresh
// initialization otherwise.
struct GlobalModel {
  nn::ParameterSet params;
  std::optional<meta::MetaTrainResult> meta;
};

GlobalModel train_global(const RunConfig& config, const Dataset& data, std::uint64_t seed);

// Runs one seed. With an output root, writes
// <root>/{checkpoints,reports,curves,logs}.
SeedResult run_seed(const RunConfig& config, const Dataset& data, std::uint64_t seed,
                    const std::optional<std::filesystem::path>& root = std::nullopt);

struct Summary {
  std::string variant;
  std::vector<SeedResult> seeds;
  double rmse_mean{0.0}, rmse_std{0.0};
  double mae_mean{0.0}, mae_std{0.0};
  double mse_mean{0.0}, mse_std{0.0};
};

Summary summarize(const std::string& variant, std::vector<SeedResult> seeds);

// Every seed of the config. With write_artifacts, outputs go under
// <out>/<name>/<seed>/ plus <out>/<name>/summary.{csv,json}.
Summary run_experiment(const RunConfig& config, bool write_artifacts = true);
Summary run_experiment(const std::filesystem::path& config_file);

void write_summary(const std::filesystem::path& dir, const Summary& summary);
std::string summary_to_json(const Summary& summary);

}  // namespace melanie::harness
