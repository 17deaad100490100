#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "melanie/agent/adaptation.hpp"
#include "melanie/env/environment.hpp"
#include "melanie/graph/synthetic.hpp"
#include "melanie/meta/meta_train.hpp"
#include "melanie/nn/parameters.hpp"

namespace melanie::harness {

// Ablation switches. use_signature_buffer is meaningless without use_meta.
struct VariantSpec {
  std::string name{"MELANIE"};
  bool use_meta{true};
  bool use_signature_buffer{true};
  bool use_kl_priority{true};

  friend bool operator==(const VariantSpec&, const VariantSpec&) = default;
};

// MELANIE, MELANIE-M, MELANIE-B or MELANIE-T; anything else throws.
VariantSpec variant_from_name(std::string_view name);
const std::vector<std::string>& variant_names();

struct EnvConfig {
  env::Mode mode{env::Mode::kGenerative};
};

struct DataConfig {
  std::string source{"synthetic"};  // "synthetic" or "directory"
  std::filesystem::path directory;  // event CSVs when source is "directory"
  graph::SyntheticEventConfig synthetic{};
  int num_events{30};
  std::uint64_t event_seed{1000};  // synthetic event i uses event_seed + i
  int train_events{26};
  int validation_events{2};
  int test_events{2};
  double split_ratio{0.8};
};

struct RunConfig {
  std::string name{"run"};
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path out{"runs"};
  nn::NetworkDims dims{};
  agent::TrainConfig train{};
  meta::MetaConfig meta{};
  EnvConfig env{};
  DataConfig data{};
  VariantSpec variant{};
};

// Throws std::invalid_argument naming the offending key.
void validate(const RunConfig& config);

/*
 * JSON with top-level keys name, seeds, out, dims, train, meta, env, data,
 * variant. Every key is optional and falls back to the defaults above;
 * unknown keys are rejected. Errors name the offending key, e.g.
 * "config key 'train.K': ...".
 */
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& file);
std::string to_json(const RunConfig& config);

// Sets one dotted key ("train.eta", "variant", "data.synthetic.num_offices")
// from its textual value. JSON literals are parsed; anything else is taken as
// a string.
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

// Dotted keys of every scalar field under a section, e.g. "train".
std::vector<std::string> config_keys(const RunConfig& config, const std::string& section);

}  // namespace melanie::harness
