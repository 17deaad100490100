#include "melanie/env/episode.hpp"

#include <fstream>
#include <stdexcept>

#include "melanie/agent/policy.hpp"
#include "melanie/graph/io.hpp"

namespace melanie::env {

void rollout(StreamingEnvironment& env, const nn::ParameterSet& params,
             const nn::EncoderOptions& encoder, std::mt19937_64& rng, const RolloutHooks& hooks) {
  const int m = params.dims().max_viewers;
  if (env.num_viewers() > static_cast<std::size_t>(m)) {
    throw std::invalid_argument("event has more viewers than the action space");
  }
  env.reset();
  const std::vector<ViewerId> viewers = env.viewers();
  std::size_t n = 0;
  int minute = env.done() ? 0 : env.current().minute;
  nn::GraphSignature H = nn::compute_signature(params, viewers, env.event_id());

  while (!env.done()) {
    const Actor actor = env.current();
    const auto before = env.neighbors(actor.viewer);

    agent::Transition t;
    t.viewer = actor.viewer;
    t.neighbors.assign(before.begin(), before.end());
    t.event_viewers = env.num_viewers();
    t.minute = actor.minute;
    const nn::ActionMask mask = nn::make_action_mask(m, env.num_viewers(), actor.viewer);
    t.state = nn::encode_state(params, H, actor.viewer, t.neighbors, encoder).state;
    t.action = nn::actor_forward(params, t.state, mask);
    const double eps = hooks.epsilon ? hooks.epsilon(n) : 0.0;
    t.chosen = agent::select_action(t.action, eps, mask, rng);

    const StepResult r = env.step(actor.viewer, t.chosen);
    ++n;
    t.reward = r.reward;
    const auto after = env.neighbors(actor.viewer);
    t.next_neighbors.assign(after.begin(), after.end());
    if (hooks.on_transition) hooks.on_transition(t);

    const bool minute_over = r.done || env.current().minute != minute;
    if (minute_over) {
      if (hooks.on_minute_end && !hooks.on_minute_end(minute)) return;
      if (!env.done()) {
        minute = env.current().minute;
        H = nn::compute_signature(params, viewers, env.event_id());
      }
    }
  }
}

Episode run_episode(StreamingEnvironment& env, const nn::ParameterSet& params, double epsilon,
                    std::uint64_t seed, const nn::EncoderOptions& encoder) {
  Episode out;
  std::mt19937_64 rng(seed);
  RolloutHooks hooks;
  hooks.epsilon = [epsilon](std::size_t) { return epsilon; };
  hooks.on_transition = [&out](const agent::Transition& t) {
    if (out.minutes.empty() || out.minutes.back().minute != t.minute) {
      out.minutes.push_back({t.minute, 0.0, 0});
    }
    out.minutes.back().sum += t.reward;
    ++out.minutes.back().count;
    out.transitions.push_back(t);
  };
  rollout(env, params, encoder, rng, hooks);
  out.mismatches = env.mismatches();
  return out;
}

void write_trajectory_csv(const std::filesystem::path& file,
                          const std::vector<agent::Transition>& transitions) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "minute,viewer,chosen,reward,priority\n";
  for (const agent::Transition& t : transitions) {
    out << t.minute << ',' << t.viewer << ',' << t.chosen << ',' << graph::format_double(t.reward)
        << ',' << graph::format_double(t.priority) << '\n';
  }
}

}  // namespace melanie::env
