#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "melanie/env/environment.hpp"
#include "melanie/harness/metrics.hpp"
#include "melanie/nn/model.hpp"
#include "melanie/nn/parameters.hpp"

namespace melanie::harness {

struct EvalReport {
  std::string event_id;
  double rmse{0.0};
  double mae{0.0};
  double mse{0.0};
  std::vector<CurvePoint> reward_curve;
  std::size_t num_query_interactions{0};
  double mean_reward{0.0};
  // Share of actions that picked a same-office peer; generative mode only.
  double intra_office_rate{0.0};
  std::vector<Prediction> residuals;
};

// Plays env greedily under fixed parameters and scores the critic against
// the realized rewards. env is normally the task's query phase.
EvalReport evaluate(const nn::ParameterSet& params, env::StreamingEnvironment& env,
                    const nn::EncoderOptions& encoder = {}, std::uint64_t seed = 0);

// q,r
void write_residuals_csv(const std::filesystem::path& file, const EvalReport& report);
// minute,average_reward
void write_reward_curve_csv(const std::filesystem::path& file, const std::vector<CurvePoint>& curve);
// Scalar fields only.
std::string report_to_json(const EvalReport& report);

}  // namespace melanie::harness
