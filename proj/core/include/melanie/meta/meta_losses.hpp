#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "melanie/agent/losses.hpp"
#include "melanie/meta/signature_buffer.hpp"
#include "melanie/nn/parameters.hpp"

namespace melanie::meta {

// Signature regularizer settings for one task.
struct SignatureTerm {
  std::string event_id;
  const SignatureBuffer* buffer{nullptr};  // null acts as an empty buffer
  double lambda{1.0};
};

struct MetaLossTerms {
  double task{0.0};
  double divergence{0.0};
  double total{0.0};  // task + lambda * divergence
};

// actor_loss + lambda * divergence(H); H is computed on the same tape.
nn::Var meta_actor_loss_expr(nn::BoundParameters& p, std::span<const agent::Transition> batch,
                             const agent::LossContext& ctx, const agent::BatchEvaluation& frozen,
                             const SignatureTerm& sig);
// critic_loss + lambda * divergence(H).
nn::Var meta_critic_loss_expr(nn::BoundParameters& p, std::span<const agent::Transition> batch,
                              const agent::LossContext& ctx, const agent::BatchEvaluation& frozen,
                              const SignatureTerm& sig);

MetaLossTerms meta_actor_loss(const nn::ParameterSet& params,
                              std::span<const agent::Transition> batch,
                              const agent::LossContext& ctx, const SignatureTerm& sig);
MetaLossTerms meta_critic_loss(const nn::ParameterSet& params,
                               std::span<const agent::Transition> batch,
                               const agent::LossContext& ctx, const SignatureTerm& sig);

struct MetaGradient {
  MetaLossTerms actor;
  MetaLossTerms critic;
  // Gradient of actor meta loss + critic meta loss. Actor weights see only
  // the first, critic weights only the second, and the shared tensors see the
  // actor term plus both divergence terms.
  nn::ParameterSet gradient;
  std::size_t skipped{0};
};

MetaGradient meta_gradient(const nn::ParameterSet& params, std::span<const agent::Transition> batch,
                           const agent::LossContext& ctx, const SignatureTerm& sig);

}  // namespace melanie::meta
