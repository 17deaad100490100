#include "melanie/nn/model.hpp"

#include <stdexcept>

namespace melanie::nn {
namespace {

void check_viewer(const ParameterSet& params, ViewerId u) {
  if (u >= static_cast<ViewerId>(params.dims().max_viewers)) {
    throw std::invalid_argument("viewer " + std::to_string(u) + " exceeds action capacity " +
                                std::to_string(params.dims().max_viewers));
  }
}

void check_signature(const ParameterSet& params, const Var& H) {
  if (H.rows() != 2 * params.dims().state || H.cols() != 1) {
    throw std::invalid_argument("signature must have length 2 * d_s");
  }
}

// W_S X_u as a d_s x 1 column.
Var transformed_self(BoundParameters& p, ViewerId u) {
  return matmul(p[ParamId::W_S], embed(p, u));
}

}  // namespace

ActionMask make_action_mask(int max_viewers, std::size_t num_viewers, ViewerId self) {
  ActionMask mask = make_action_mask(max_viewers, num_viewers);
  if (self < mask.size()) mask[self] = false;
  return mask;
}

ActionMask make_action_mask(int max_viewers, std::size_t num_viewers) {
  if (num_viewers > static_cast<std::size_t>(max_viewers)) {
    throw std::invalid_argument("event has more viewers than the action capacity");
  }
  ActionMask mask(static_cast<std::size_t>(max_viewers), false);
  for (std::size_t i = 0; i < num_viewers; ++i) mask[i] = true;
  return mask;
}

Var embed(BoundParameters& p, ViewerId u) {
  check_viewer(p.params(), u);
  return transpose(gather_rows(p[ParamId::X], {static_cast<Eigen::Index>(u)}));
}

Var signature(BoundParameters& p, std::span<const ViewerId> active) {
  if (active.empty()) throw std::invalid_argument("signature needs at least one active viewer");
  std::vector<Eigen::Index> rows;
  rows.reserve(active.size());
  for (ViewerId v : active) {
    check_viewer(p.params(), v);
    rows.push_back(static_cast<Eigen::Index>(v));
  }
  Var pooled = transpose(mean_rows(gather_rows(p[ParamId::X], std::move(rows))));
  return elu(matmul(p[ParamId::W_H], pooled) + p[ParamId::b_H]);
}

Var attention_logits(BoundParameters& p, const Var& H, ViewerId u,
                     std::span<const Neighbor> neighbors) {
  check_signature(p.params(), H);
  if (neighbors.empty()) throw std::invalid_argument("attention needs at least one neighbor");
  const Eigen::Index ds = p.params().dims().state;
  const auto k = static_cast<Eigen::Index>(neighbors.size());

  std::vector<Eigen::Index> rows;
  rows.reserve(neighbors.size());
  Matrix weights(k, 1);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Neighbor& n = neighbors[static_cast<std::size_t>(i)];
    check_viewer(p.params(), n.viewer);
    if (n.viewer == u) throw std::invalid_argument("viewer listed as its own neighbor");
    if (n.throughput < 0.0) throw std::invalid_argument("negative connection throughput");
    rows.push_back(static_cast<Eigen::Index>(n.viewer));
    weights(i, 0) = n.throughput;
  }

  Var h_self = slice_rows(H, 0, ds);
  Var h_peer = slice_rows(H, ds, ds);
  Var z_u = transformed_self(p, u);
  // k x d_s: row i is (W_S X_{v_i})^T.
  Var z_peers = matmul(gather_rows(p[ParamId::X], std::move(rows)), transpose(p[ParamId::W_S]));
  Var self_term = broadcast(matmul(transpose(h_self), z_u), k, 1);
  Var inner = matmul(z_peers, h_peer) + self_term;
  Var scaled = cwise_product(p.tape().constant(std::move(weights)), inner);
  return leaky_relu(scaled, kLeakySlope);
}

EncodedState encode_state(BoundParameters& p, const Var& H, ViewerId u,
                          std::span<const Neighbor> neighbors, const EncoderOptions& options) {
  check_viewer(p.params(), u);
  if (neighbors.empty()) return EncodedState{elu(transformed_self(p, u)), Var{}};

  Var logits = attention_logits(p, H, u, neighbors);
  Var coeff = masked_softmax(logits, std::vector<bool>(neighbors.size(), true));
  Var aggregate;
  if (options.literal_eq1) {
    aggregate = matmul(transformed_self(p, u), sum(coeff));
  } else {
    std::vector<Eigen::Index> rows;
    rows.reserve(neighbors.size());
    for (const Neighbor& n : neighbors) rows.push_back(static_cast<Eigen::Index>(n.viewer));
    // d_s x k times k x 1.
    Var z_peers_t = matmul(p[ParamId::W_S], transpose(gather_rows(p[ParamId::X], std::move(rows))));
    aggregate = matmul(z_peers_t, coeff);
  }
  return EncodedState{elu(aggregate), coeff};
}

Var actor_logits(BoundParameters& p, const Var& state) {
  if (state.rows() != p.params().dims().state || state.cols() != 1) {
    throw std::invalid_argument("actor: state must have length d_s");
  }
  Var hidden = elu(matmul(p[ParamId::ActorW1], state) + p[ParamId::Actorb1]);
  return matmul(p[ParamId::ActorW2], hidden) + p[ParamId::Actorb2];
}

Var actor_probabilities(BoundParameters& p, const Var& state, const ActionMask& mask) {
  if (static_cast<int>(mask.size()) != p.params().dims().max_viewers) {
    throw std::invalid_argument("actor: mask length must equal M");
  }
  return masked_softmax(actor_logits(p, state), mask);
}

Var critic_value(BoundParameters& p, const Var& state, const Var& action) {
  const NetworkDims& d = p.params().dims();
  if (state.rows() != d.state || state.cols() != 1) {
    throw std::invalid_argument("critic: state must have length d_s");
  }
  if (action.rows() != d.max_viewers || action.cols() != 1) {
    throw std::invalid_argument("critic: action must have length M");
  }
  Var input = vstack(state, action);
  Var hidden = elu(matmul(p[ParamId::CriticW1], input) + p[ParamId::Criticb1]);
  return matmul(p[ParamId::CriticW2], hidden) + p[ParamId::Criticb2];
}

Vector embed(const ParameterSet& params, ViewerId u) {
  Tape tape(false);
  BoundParameters p(tape, params);
  return embed(p, u).value().col(0);
}

GraphSignature compute_signature(const ParameterSet& params, std::span<const ViewerId> active,
                                 std::string event_id) {
  Tape tape(false);
  BoundParameters p(tape, params);
  return GraphSignature{signature(p, active).value().col(0), std::move(event_id)};
}

double attention_score(const ParameterSet& params, const GraphSignature& H, ViewerId u, ViewerId v,
                       double b_uv) {
  if (u == v) throw std::invalid_argument("attention_score: u equals v");
  Tape tape(false);
  BoundParameters p(tape, params);
  const Neighbor n{v, b_uv};
  return attention_logits(p, tape.constant(H.values), u, std::span<const Neighbor>(&n, 1))
      .value()(0, 0);
}

StateEncoding encode_state(const ParameterSet& params, const GraphSignature& H, ViewerId u,
                           std::span<const Neighbor> neighbors, const EncoderOptions& options) {
  Tape tape(false);
  BoundParameters p(tape, params);
  EncodedState s = encode_state(p, tape.constant(H.values), u, neighbors, options);
  StateEncoding out;
  out.state = s.state.value().col(0);
  if (s.coefficients.valid()) out.coefficients = s.coefficients.value().col(0);
  return out;
}

Vector actor_forward(const ParameterSet& params, const Vector& state, const ActionMask& mask) {
  Tape tape(false);
  BoundParameters p(tape, params);
  return actor_probabilities(p, tape.constant(state), mask).value().col(0);
}

double critic_forward(const ParameterSet& params, const Vector& state, const Vector& action) {
  Tape tape(false);
  BoundParameters p(tape, params);
  return critic_value(p, tape.constant(state), tape.constant(action)).scalar();
}

}  // namespace melanie::nn
