#include "melanie/agent/losses.hpp"

#include <iostream>
#include <stdexcept>

namespace melanie::agent {
namespace {

bool chosen_selectable(const nn::ParameterSet& params, const Transition& t) {
  const auto m = static_cast<std::size_t>(params.dims().max_viewers);
  return t.event_viewers <= m && t.chosen < t.event_viewers && t.chosen != t.viewer &&
         t.viewer < m;
}

void require_batch(std::span<const Transition> batch) {
  if (batch.empty()) throw std::invalid_argument("loss: batch is empty");
}

}  // namespace

BatchEvaluation evaluate_batch(const nn::ParameterSet& params, std::span<const Transition> batch,
                               const LossContext& ctx) {
  require_batch(batch);
  const int m = params.dims().max_viewers;
  const nn::GraphSignature H = nn::compute_signature(params, ctx.active_viewers);

  BatchEvaluation out;
  out.states.reserve(batch.size());
  for (const Transition& t : batch) {
    const bool ok = chosen_selectable(params, t);
    out.usable.push_back(ok);
    if (!ok) {
      ++out.skipped;
      out.states.emplace_back();
      out.actions.emplace_back();
      out.values.push_back(0.0);
      out.targets.push_back(t.reward);
      out.advantages.push_back(0.0);
      continue;
    }
    const nn::ActionMask mask = nn::make_action_mask(m, t.event_viewers, t.viewer);
    nn::Vector s = nn::encode_state(params, H, t.viewer, t.neighbors, ctx.encoder).state;
    nn::Vector a = nn::actor_forward(params, s, mask);
    const double q = nn::critic_forward(params, s, a);
    double target = t.reward;
    if (ctx.bootstrap) {
      nn::Vector s_next = nn::encode_state(params, H, t.viewer, t.next_neighbors, ctx.encoder).state;
      nn::Vector a_next = nn::actor_forward(params, s_next, mask);
      target += ctx.gamma * nn::critic_forward(params, s_next, a_next);
    }
    out.states.push_back(std::move(s));
    out.actions.push_back(std::move(a));
    out.values.push_back(q);
    out.targets.push_back(target);
    out.advantages.push_back(target - q);
  }
  if (out.skipped > 0) {
    std::clog << "warning: skipped " << out.skipped
              << " transition(s) whose chosen viewer is no longer selectable\n";
  }
  return out;
}

nn::Var actor_loss_expr(nn::BoundParameters& p, const nn::Var& H,
                        std::span<const Transition> batch, const LossContext& ctx,
                        const BatchEvaluation& frozen) {
  require_batch(batch);
  nn::Tape& tape = p.tape();
  const int m = p.params().dims().max_viewers;
  nn::Var total = tape.constant(nn::Matrix::Zero(1, 1));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!frozen.usable[i]) continue;
    const Transition& t = batch[i];
    const nn::ActionMask mask = nn::make_action_mask(m, t.event_viewers, t.viewer);
    nn::Var s = nn::encode_state(p, H, t.viewer, t.neighbors, ctx.encoder).state;
    nn::Var log_prob =
        nn::masked_log_prob(nn::actor_logits(p, s), mask, static_cast<Eigen::Index>(t.chosen));
    total = total + (-frozen.advantages[i]) * log_prob;
  }
  const std::size_t n = frozen.num_usable();
  return n == 0 ? total : (1.0 / static_cast<double>(n)) * total;
}

nn::Var critic_loss_expr(nn::BoundParameters& p, std::span<const Transition> batch,
                         const BatchEvaluation& frozen) {
  require_batch(batch);
  nn::Tape& tape = p.tape();
  nn::Var total = tape.constant(nn::Matrix::Zero(1, 1));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!frozen.usable[i]) continue;
    nn::Var q = nn::critic_value(p, tape.constant(frozen.states[i]),
                                 tape.constant(frozen.actions[i]));
    total = total + nn::square(nn::add_scalar(q, -frozen.targets[i]));
  }
  const std::size_t n = frozen.num_usable();
  return n == 0 ? total : (1.0 / static_cast<double>(n)) * total;
}

namespace {

LossGradient run(const nn::ParameterSet& params, std::span<const Transition> batch,
                 const LossContext& ctx, bool actor, bool record) {
  const BatchEvaluation frozen = evaluate_batch(params, batch, ctx);
  nn::Tape tape(record);
  nn::BoundParameters p(tape, params);
  nn::Var loss;
  if (actor) {
    nn::Var H = nn::signature(p, ctx.active_viewers);
    loss = actor_loss_expr(p, H, batch, ctx, frozen);
  } else {
    loss = critic_loss_expr(p, batch, frozen);
  }
  LossGradient out;
  out.loss = loss.scalar();
  out.skipped = frozen.skipped;
  out.gradient = record ? nn::gradient(p, loss) : nn::ParameterSet::zeros(params.dims());
  return out;
}

}  // namespace

double actor_loss(const nn::ParameterSet& params, std::span<const Transition> batch,
                  const LossContext& ctx) {
  return run(params, batch, ctx, true, false).loss;
}

double critic_loss(const nn::ParameterSet& params, std::span<const Transition> batch,
                   const LossContext& ctx) {
  return run(params, batch, ctx, false, false).loss;
}

LossGradient actor_loss_gradient(const nn::ParameterSet& params, std::span<const Transition> batch,
                                 const LossContext& ctx) {
  return run(params, batch, ctx, true, true);
}

LossGradient critic_loss_gradient(const nn::ParameterSet& params,
                                  std::span<const Transition> batch, const LossContext& ctx) {
  return run(params, batch, ctx, false, true);
}

}  // namespace melanie::agent
