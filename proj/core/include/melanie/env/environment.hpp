#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "melanie/graph/network.hpp"
#include "melanie/graph/synthetic.hpp"

namespace melanie::env {

using graph::Neighbor;
using graph::ViewerId;

enum class Mode { kReplay, kGenerative };

// Which slice of the task the agent acts on. Interactions before the slice
// are observed at reset so neighborhoods start warm.
enum class Phase { kSupport, kQuery, kFull };

// The viewer the tracker must connect next.
struct Actor {
  ViewerId viewer{0};
  int minute{0};
  std::optional<ViewerId> trace_partner;  // replay mode only
};

struct StepResult {
  double reward{0.0};
  bool done{false};
};

struct Observation {
  int minute{0};
  std::size_t observed_interactions{0};
};

/*
 * Live-streaming MDP over one event.
 *
 * Replay mode walks the trace: each interaction's source acts once, and the
 * reward is the trace's normalized throughput for that interaction whatever
 * the agent chose (a disagreement is counted). Generative mode runs the
 * office link model: each minute every viewer with at least one observed
 * interaction acts once, the chosen link is sampled and normalized, and the
 * trace's background interactions for that minute are observed afterwards.
 */
class StreamingEnvironment {
 public:
  // The task network must be normalized.
  static StreamingEnvironment replay(const graph::Task& task, Phase phase);
  // The task network must hold raw Mbps throughputs generated under config.
  static StreamingEnvironment generative(const graph::Task& task,
                                         const graph::SyntheticEventConfig& config,
                                         std::uint64_t seed, Phase phase);

  Observation reset();

  bool done() const noexcept { return done_; }
  const Actor& current() const;
  int current_minute() const noexcept { return minute_; }

  // u must be the current actor; chosen must be a different viewer of the
  // event. Throws after done.
  StepResult step(ViewerId u, ViewerId chosen);

  std::span<const Neighbor> neighbors(ViewerId u) const { return observed_.neighbors(u); }

  Mode mode() const noexcept { return mode_; }
  Phase phase() const noexcept { return phase_; }
  const std::string& event_id() const { return network_->event_id(); }
  std::size_t num_viewers() const { return network_->num_viewers(); }
  std::vector<ViewerId> viewers() const { return network_->viewers(); }
  const graph::LinkModel* link_model() const { return link_ ? &*link_ : nullptr; }

  std::size_t steps_taken() const noexcept { return steps_; }
  std::size_t mismatches() const noexcept { return mismatches_; }

 private:
  StreamingEnvironment(std::shared_ptr<const graph::TemporalInteractionNetwork> network, Mode mode,
                       Phase phase, graph::IndexRange acting);

  static int minute_of(const graph::Interaction& e);
  void position_replay();
  void position_generative();

  std::shared_ptr<const graph::TemporalInteractionNetwork> network_;
  Mode mode_;
  Phase phase_;
  graph::IndexRange acting_;
  std::optional<graph::LinkModel> link_;
  std::uint64_t seed_{0};

  graph::NeighborhoodIndex observed_;
  std::mt19937_64 rng_;
  std::size_t cursor_{0};
  int minute_{0};
  int last_minute_{0};
  std::vector<ViewerId> minute_actors_;
  std::size_t actor_index_{0};
  Actor current_{};
  bool done_{true};
  bool reset_once_{false};
  std::size_t steps_{0};
  std::size_t mismatches_{0};
};

}  // namespace melanie::env
