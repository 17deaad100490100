#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "melanie/agent/replay.hpp"
#include "melanie/nn/model.hpp"
#include "melanie/nn/parameters.hpp"

namespace melanie::agent {

// What a loss needs besides the batch: the viewers pooled into the event
// signature and the encoder variant.
struct LossContext {
  std::vector<ViewerId> active_viewers;
  nn::EncoderOptions encoder{};
  // Adds gamma * Q(s', pi(s')) to the critic target.
  bool bootstrap{false};
  double gamma{0.0};
};

/*
 * Forward pass of a batch under fixed parameters: the re-encoded state,
 * the current policy's distribution, the critic value, the regression target,
 * and the advantage target - Q. Transitions whose chosen viewer is not
 * selectable under the current mask are marked unusable.
 */
struct BatchEvaluation {
  std::vector<nn::Vector> states;
  std::vector<nn::Vector> actions;
  std::vector<double> values;
  std::vector<double> targets;
  std::vector<double> advantages;
  std::vector<bool> usable;
  std::size_t skipped{0};

  std::size_t num_usable() const { return usable.size() - skipped; }
};

BatchEvaluation evaluate_batch(const nn::ParameterSet& params, std::span<const Transition> batch,
                               const LossContext& ctx);

// -(1/n) sum log pi(chosen | s) * advantage, with the advantages held
// constant. H is the event signature on the same tape.
nn::Var actor_loss_expr(nn::BoundParameters& p, const nn::Var& H,
                        std::span<const Transition> batch, const LossContext& ctx,
                        const BatchEvaluation& frozen);

// (1/n) sum (target - Q_w(s, a))^2 with s, a and target held constant, so
// only the critic weights receive gradient.
nn::Var critic_loss_expr(nn::BoundParameters& p, std::span<const Transition> batch,
                         const BatchEvaluation& frozen);

struct LossGradient {
  double loss{0.0};
  nn::ParameterSet gradient;
  std::size_t skipped{0};
};

double actor_loss(const nn::ParameterSet& params, std::span<const Transition> batch,
                  const LossContext& ctx);
double critic_loss(const nn::ParameterSet& params, std::span<const Transition> batch,
                   const LossContext& ctx);
LossGradient actor_loss_gradient(const nn::ParameterSet& params, std::span<const Transition> batch,
                                 const LossContext& ctx);
LossGradient critic_loss_gradient(const nn::ParameterSet& params,
                                  std::span<const Transition> batch, const LossContext& ctx);

}  // namespace melanie::agent
