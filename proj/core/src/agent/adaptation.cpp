#include "melanie/agent/adaptation.hpp"

#include <fstream>
#include <random>
#include <stdexcept>

#include "melanie/agent/policy.hpp"
#include "melanie/env/episode.hpp"
#include "melanie/graph/io.hpp"
#include "melanie/instrumentation.hpp"

namespace melanie::agent {

void validate(const TrainConfig& c) {
  if (!(c.eta > 0.0)) throw std::invalid_argument("train.eta must be > 0");
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) throw std::invalid_argument("train.gamma must be in [0,1]");
  if (!(0.0 <= c.epsilon_end && c.epsilon_end <= c.epsilon_start && c.epsilon_start <= 1.0)) {
    throw std::invalid_argument("train: need 0 <= epsilon_end <= epsilon_start <= 1");
  }
  if (!(c.epsilon_decay > 0.0 && c.epsilon_decay <= 1.0)) {
    throw std::invalid_argument("train.epsilon_decay must be in (0,1]");
  }
  if (c.K == 0 || c.K > c.replay_capacity) throw std::invalid_argument("train.K must satisfy 0 < K <= replay_capacity");
  if (c.adaptation_steps < 0) throw std::invalid_argument("train.adaptation_steps must be >= 0");
  if (c.update_every_minutes < 1) throw std::invalid_argument("train.update_every_minutes must be >= 1");
  if (c.histogram_bins < 2) throw std::invalid_argument("train.histogram_bins must be >= 2");
  if (!(c.laplace_alpha > 0.0)) throw std::invalid_argument("train.laplace_alpha must be > 0");
  if (!(c.max_grad_norm >= 0.0)) throw std::invalid_argument("train.max_grad_norm must be >= 0");
}

LossContext loss_context(const TrainConfig& config, const env::StreamingEnvironment& env) {
  return LossContext{env.viewers(), config.encoder, config.bootstrap, config.gamma};
}

AdaptationResult adapt_task(const nn::ParameterSet& global, const graph::Task& task,
                            const TrainConfig& config, env::StreamingEnvironment& env) {
  validate(config);
  if (task.support.empty()) throw std::invalid_argument("adapt_task: empty support set");

  AdaptationResult out;
  out.params = global;
  if (config.adaptation_steps == 0) return out;

  ReplayBuffer buffer(config.replay_capacity, config.histogram_bins, config.laplace_alpha,
                      config.use_kl_priority);
  const LossContext ctx = loss_context(config, env);
  const EpsilonSchedule schedule{config.epsilon_start, config.epsilon_end, config.epsilon_decay};
  std::mt19937_64 rng(config.seed);
  std::mt19937_64 sampler(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::size_t actions = 0;
  int idle_minutes = 0;

  env::RolloutHooks hooks;
  hooks.epsilon = [&](std::size_t n) {
    actions = n + 1;
    return schedule.at(static_cast<long>(n));
  };
  hooks.on_transition = [&](const Transition& t) {
    buffer.record_reward(t.viewer, t.reward, t.minute);
    buffer.push(t);
    ++out.transitions;
  };
  hooks.on_minute_end = [&](int) {
    if (++idle_minutes < config.update_every_minutes) return true;
    idle_minutes = 0;
    const std::vector<Transition> batch = config.use_kl_priority
                                              ? buffer.sample_top_k(config.K)
                                              : buffer.sample_uniform(config.K, sampler);
    LossGradient ga = actor_loss_gradient(out.params, batch, ctx);
    LossGradient gc = critic_loss_gradient(out.params, batch, ctx);
    if (config.max_grad_norm > 0.0) {
      nn::clip_global_norm(ga.gradient, config.max_grad_norm);
      nn::clip_global_norm(gc.gradient, config.max_grad_norm);
    }
    out.params.axpy(-config.eta, ga.gradient);
    out.params.axpy(-config.eta, gc.gradient);
    ++instrumentation::counters().gradient_steps;
    out.skipped += ga.skipped;
    out.log.push_back({static_cast<int>(out.log.size()) + 1, ga.loss, gc.loss,
                       buffer.mean_priority(), schedule.at(static_cast<long>(actions))});
    return static_cast<int>(out.log.size()) < config.adaptation_steps;
  };
  env::rollout(env, out.params, config.encoder, rng, hooks);
  return out;
}

void write_adaptation_log(const std::filesystem::path& file,
                          const std::vector<AdaptationStep>& log) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "step,actor_loss,critic_loss,mean_priority,epsilon\n";
  for (const AdaptationStep& s : log) {
    out << s.step << ',' << graph::format_double(s.actor_loss) << ','
        << graph::format_double(s.critic_loss) << ',' << graph::format_double(s.mean_priority)
        << ',' << graph::format_double(s.epsilon) << '\n';
  }
}

}  // namespace melanie::agent
