#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "melanie/graph/network.hpp"

namespace melanie::graph {

// Enterprise topology for desk-scale events: viewers sit in offices, links
// inside an office are fast, links across offices are slower, and the CDN is
// the slowest fallback.
struct SyntheticEventConfig {
  int num_offices{4};
  int viewers_per_office{12};
  double intra_office_bandwidth{100.0};
  double inter_office_bandwidth{20.0};
  double cdn_bandwidth{5.0};
  double throughput_noise_std{0.1};
  int duration_minutes{30};
  int interactions_per_minute{20};
  // Probability that an interaction's target is drawn from the source's own
  // office; otherwise the target is uniform over all other viewers.
  double intra_office_affinity{0.5};
  std::uint64_t office_assignment_seed{1};

  int num_viewers() const noexcept { return num_offices * viewers_per_office; }

  friend bool operator==(const SyntheticEventConfig&, const SyntheticEventConfig&) = default;
};

void validate(const SyntheticEventConfig& config);

// Flat JSON object keyed by the field names above. Missing keys keep their
// defaults; unknown keys are rejected.
SyntheticEventConfig parse_synthetic_config(std::string_view json_text);
SyntheticEventConfig load_synthetic_config(const std::filesystem::path& file);
std::string to_json(const SyntheticEventConfig& config);

// Office membership and per-pair link capacities. The assignment depends only
// on office_assignment_seed, so events sharing that seed share a structure.
class LinkModel {
 public:
  explicit LinkModel(SyntheticEventConfig config);

  const SyntheticEventConfig& config() const noexcept { return config_; }
  int office_of(ViewerId v) const;
  bool same_office(ViewerId u, ViewerId v) const { return office_of(u) == office_of(v); }
  double capacity(ViewerId u, ViewerId v) const;

  // Capacity perturbed by N(0, (noise * capacity)^2), clamped at 0. Mbps.
  double sample_throughput(ViewerId u, ViewerId v, std::mt19937_64& rng) const;

  // Maps Mbps to a [0,1] reward: the CDN rate scores 0, an intra-office link
  // three noise deviations above capacity scores 1.
  double normalize(double mbps) const;
  double expected_reward(ViewerId u, ViewerId v) const { return normalize(capacity(u, v)); }

 private:
  SyntheticEventConfig config_;
  std::vector<int> office_;
};

TemporalInteractionNetwork generate_synthetic_event(const SyntheticEventConfig& config,
                                                    std::uint64_t seed,
                                                    std::string event_id = {});

}  // namespace melanie::graph
