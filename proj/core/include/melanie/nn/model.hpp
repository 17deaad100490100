#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "melanie/graph/network.hpp"
#include "melanie/nn/autodiff.hpp"
#include "melanie/nn/parameters.hpp"

namespace melanie::nn {

using graph::Neighbor;
using graph::ViewerId;

inline constexpr double kLeakySlope = 0.2;

struct EncoderOptions {
  // Aggregate the viewer's own transformed embedding under the attention
  // weights instead of its neighbors'. Since the weights sum to one this
  // reduces to ELU(W_S X_u).
  bool literal_eq1{false};
};

// Learned summary of one event, length 2 * d_s.
struct GraphSignature {
  Vector values;
  std::string event_id;
};

// True for selectable viewers: ids below num_viewers, excluding self.
using ActionMask = std::vector<bool>;
ActionMask make_action_mask(int max_viewers, std::size_t num_viewers, ViewerId self);
ActionMask make_action_mask(int max_viewers, std::size_t num_viewers);

// Differentiable forms. Results live on the bound tape.

Var embed(BoundParameters& p, ViewerId u);
// ELU(W_H * mean(X_active) + b_H).
Var signature(BoundParameters& p, std::span<const ViewerId> active);
// LeakyReLU(b_uv * <H, [W_S X_u || W_S X_v]>) for every neighbor v.
Var attention_logits(BoundParameters& p, const Var& H, ViewerId u,
                     std::span<const Neighbor> neighbors);

struct EncodedState {
  Var state;         // d_s x 1
  Var coefficients;  // k x 1; unbound when the neighborhood is empty
};
EncodedState encode_state(BoundParameters& p, const Var& H, ViewerId u,
                          std::span<const Neighbor> neighbors, const EncoderOptions& options);

Var actor_logits(BoundParameters& p, const Var& state);
Var actor_probabilities(BoundParameters& p, const Var& state, const ActionMask& mask);
Var critic_value(BoundParameters& p, const Var& state, const Var& action);

// Plain evaluation. Each call builds a non-recording tape, so results are
// bit-identical to the differentiable path.

Vector embed(const ParameterSet& params, ViewerId u);
GraphSignature compute_signature(const ParameterSet& params, std::span<const ViewerId> active,
                                 std::string event_id = {});
double attention_score(const ParameterSet& params, const GraphSignature& H, ViewerId u, ViewerId v,
                       double b_uv);

struct StateEncoding {
  Vector state;
  Vector coefficients;  // empty when the neighborhood is empty
};
StateEncoding encode_state(const ParameterSet& params, const GraphSignature& H, ViewerId u,
                           std::span<const Neighbor> neighbors, const EncoderOptions& options = {});

Vector actor_forward(const ParameterSet& params, const Vector& state, const ActionMask& mask);
double critic_forward(const ParameterSet& params, const Vector& state, const Vector& action);

}  // namespace melanie::nn
