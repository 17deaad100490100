#include "melanie/env/environment.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace melanie::env {
namespace {

graph::IndexRange range_for(const graph::Task& task, Phase phase) {
  switch (phase) {
    case Phase::kSupport:
      return task.support;
    case Phase::kQuery:
      return task.query;
    case Phase::kFull:
      return {0, task.network.size()};
  }
  throw std::invalid_argument("unknown phase");
}

}  // namespace

StreamingEnvironment::StreamingEnvironment(
    std::shared_ptr<const graph::TemporalInteractionNetwork> network, Mode mode, Phase phase,
    graph::IndexRange acting)
    : network_(std::move(network)),
      mode_(mode),
      phase_(phase),
      acting_(acting),
      observed_(network_->num_viewers()) {
  if (acting_.empty()) throw std::invalid_argument("environment: phase has no interactions");
}

StreamingEnvironment StreamingEnvironment::replay(const graph::Task& task, Phase phase) {
  if (!task.network.normalized()) {
    throw std::invalid_argument("replay environment needs a normalized network");
  }
  auto net = std::make_shared<const graph::TemporalInteractionNetwork>(task.network);
  return StreamingEnvironment(std::move(net), Mode::kReplay, phase, range_for(task, phase));
}

StreamingEnvironment StreamingEnvironment::generative(const graph::Task& task,
                                                      const graph::SyntheticEventConfig& config,
                                                      std::uint64_t seed, Phase phase) {
  if (task.network.normalized()) {
    throw std::invalid_argument("generative environment needs raw Mbps throughputs");
  }
  if (task.network.num_viewers() > static_cast<std::size_t>(config.num_viewers())) {
    throw std::invalid_argument("event has more viewers than the link model");
  }
  auto net = std::make_shared<const graph::TemporalInteractionNetwork>(task.network);
  StreamingEnvironment env(std::move(net), Mode::kGenerative, phase, range_for(task, phase));
  env.link_.emplace(config);
  env.seed_ = seed;
  return env;
}

int StreamingEnvironment::minute_of(const graph::Interaction& e) {
  return static_cast<int>(std::floor(e.time / 60.0));
}

Observation StreamingEnvironment::reset() {
  observed_.clear();
  rng_.seed(seed_);
  steps_ = 0;
  mismatches_ = 0;
  done_ = false;
  reset_once_ = true;

  for (std::size_t i = 0; i < acting_.begin; ++i) {
    graph::Interaction e = (*network_)[i];
    if (link_) e.throughput = link_->normalize(e.throughput);
    observed_.observe(e);
  }
  cursor_ = acting_.begin;
  minute_ = minute_of((*network_)[acting_.begin]);
  last_minute_ = minute_of((*network_)[acting_.end - 1]);

  if (mode_ == Mode::kReplay) {
    position_replay();
  } else {
    minute_actors_.clear();
    actor_index_ = 0;
    position_generative();
  }
  return {minute_, observed_.observed()};
}

void StreamingEnvironment::position_replay() {
  if (cursor_ >= acting_.end) {
    done_ = true;
    return;
  }
  const graph::Interaction& e = (*network_)[cursor_];
  minute_ = minute_of(e);
  current_ = Actor{e.source, minute_, e.target};
}

// Advances to the next viewer that must act, observing each finished
// minute's background interactions on the way.
void StreamingEnvironment::position_generative() {
  while (true) {
    if (actor_index_ < minute_actors_.size()) {
      current_ = Actor{minute_actors_[actor_index_], minute_, std::nullopt};
      return;
    }
    if (!minute_actors_.empty() || actor_index_ > 0) {
      // Minute finished: observe the trace and move on.
      while (cursor_ < acting_.end && minute_of((*network_)[cursor_]) <= minute_) {
        graph::Interaction e = (*network_)[cursor_++];
        e.throughput = link_->normalize(e.throughput);
        observed_.observe(e);
      }
      ++minute_;
      minute_actors_.clear();
      actor_index_ = 0;
    }
    if (minute_ > last_minute_) {
      done_ = true;
      return;
    }
    for (ViewerId v = 0; v < network_->num_viewers(); ++v) {
      if (observed_.has_interacted(v)) minute_actors_.push_back(v);
    }
    if (minute_actors_.empty()) {
      // Nobody can act yet; treat the minute as finished.
      actor_index_ = 1;
    }
  }
}

const Actor& StreamingEnvironment::current() const {
  if (!reset_once_) throw std::logic_error("environment: reset() not called");
  if (done_) throw std::logic_error("environment: episode is done");
  return current_;
}

StepResult StreamingEnvironment::step(ViewerId u, ViewerId chosen) {
  const Actor& actor = current();
  if (u != actor.viewer) {
    throw std::invalid_argument("step: viewer " + std::to_string(u) + " is not the current actor " +
                                std::to_string(actor.viewer));
  }
  if (chosen >= network_->num_viewers() || chosen == u) {
    throw std::invalid_argument("step: invalid target " + std::to_string(chosen));
  }
  ++steps_;
  StepResult out;
  if (mode_ == Mode::kReplay) {
    const graph::Interaction& e = (*network_)[cursor_];
    out.reward = e.throughput;
    if (chosen != e.target) ++mismatches_;
    observed_.observe(e);
    ++cursor_;
    position_replay();
  } else {
    const double mbps = link_->sample_throughput(u, chosen, rng_);
    out.reward = link_->normalize(mbps);
    const double t = 60.0 * minute_ + 60.0 * static_cast<double>(actor_index_) /
                                          static_cast<double>(minute_actors_.size());
    observed_.observe(graph::Interaction{u, chosen, t, out.reward});
    ++actor_index_;
    position_generative();
  }
  out.done = done_;
  return out;
}

}  // namespace melanie::env
