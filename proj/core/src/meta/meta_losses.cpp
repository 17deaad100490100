#include "melanie/meta/meta_losses.hpp"

#include "melanie/instrumentation.hpp"

namespace melanie::meta {
namespace {

const SignatureBuffer& buffer_of(const SignatureTerm& sig) {
  static const SignatureBuffer kEmpty(1);
  return sig.buffer ? *sig.buffer : kEmpty;
}

nn::Var divergence(nn::BoundParameters& p, const agent::LossContext& ctx, const SignatureTerm& sig,
                   nn::Var* H_out) {
  nn::Var H = nn::signature(p, ctx.active_viewers);
  if (H_out) *H_out = H;
  return signature_divergence_expr(H, sig.event_id, buffer_of(sig));
}

double plain_divergence(const nn::ParameterSet& params, const agent::LossContext& ctx,
                        const SignatureTerm& sig) {
  return signature_divergence(nn::compute_signature(params, ctx.active_viewers, sig.event_id),
                              buffer_of(sig));
}

}  // namespace

nn::Var meta_actor_loss_expr(nn::BoundParameters& p, std::span<const agent::Transition> batch,
                             const agent::LossContext& ctx, const agent::BatchEvaluation& frozen,
                             const SignatureTerm& sig) {
  ++instrumentation::counters().meta_loss_evaluations;
  nn::Var H;
  nn::Var div = divergence(p, ctx, sig, &H);
  return agent::actor_loss_expr(p, H, batch, ctx, frozen) + sig.lambda * div;
}

nn::Var meta_critic_loss_expr(nn::BoundParameters& p, std::span<const agent::Transition> batch,
                              const agent::LossContext& ctx, const agent::BatchEvaluation& frozen,
                              const SignatureTerm& sig) {
  ++instrumentation::counters().meta_loss_evaluations;
  nn::Var div = divergence(p, ctx, sig, nullptr);
  return agent::critic_loss_expr(p, batch, frozen) + sig.lambda * div;
}

MetaLossTerms meta_actor_loss(const nn::ParameterSet& params,
                              std::span<const agent::Transition> batch,
                              const agent::LossContext& ctx, const SignatureTerm& sig) {
  ++instrumentation::counters().meta_loss_evaluations;
  MetaLossTerms out;
  out.task = agent::actor_loss(params, batch, ctx);
  out.divergence = plain_divergence(params, ctx, sig);
  out.total = out.task + sig.lambda * out.divergence;
  return out;
}

MetaLossTerms meta_critic_loss(const nn::ParameterSet& params,
                               std::span<const agent::Transition> batch,
                               const agent::LossContext& ctx, const SignatureTerm& sig) {
  ++instrumentation::counters().meta_loss_evaluations;
  MetaLossTerms out;
  out.task = agent::critic_loss(params, batch, ctx);
  out.divergence = plain_divergence(params, ctx, sig);
  out.total = out.task + sig.lambda * out.divergence;
  return out;
}

MetaGradient meta_gradient(const nn::ParameterSet& params, std::span<const agent::Transition> batch,
                           const agent::LossContext& ctx, const SignatureTerm& sig) {
  const agent::BatchEvaluation frozen = agent::evaluate_batch(params, batch, ctx);
  nn::Tape tape;
  nn::BoundParameters p(tape, params);

  nn::Var H;
  nn::Var div = divergence(p, ctx, sig, &H);
  nn::Var actor_task = agent::actor_loss_expr(p, H, batch, ctx, frozen);
  nn::Var critic_task = agent::critic_loss_expr(p, batch, frozen);
  nn::Var total = actor_task + critic_task + (2.0 * sig.lambda) * div;
  instrumentation::counters().meta_loss_evaluations += 2;

  MetaGradient out;
  const double d = div.scalar();
  out.actor = {actor_task.scalar(), d, actor_task.scalar() + sig.lambda * d};
  out.critic = {critic_task.scalar(), d, critic_task.scalar() + sig.lambda * d};
  out.skipped = frozen.skipped;
  out.gradient = nn::gradient(p, total);
  return out;
}

}  // namespace melanie::meta
