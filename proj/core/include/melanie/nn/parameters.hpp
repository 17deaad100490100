#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "melanie/nn/autodiff.hpp"

namespace melanie::nn {

struct NetworkDims {
  int embedding{8};    // d
  int state{8};        // d_s
  int max_viewers{48}; // M, action-space capacity
  int hidden{32};      // width of the actor and critic hidden layers

  friend bool operator==(const NetworkDims&, const NetworkDims&) = default;
};

void validate(const NetworkDims& dims);

// Tensor slots. Names follow the checkpoint keys.
enum class ParamId : std::size_t {
  X,         // M x d embedding table
  W_S,       // d_s x d attention transform
  W_H,       // 2d_s x d signature map
  b_H,       // 2d_s x 1
  ActorW1,   // hidden x d_s
  Actorb1,   // hidden x 1
  ActorW2,   // M x hidden
  Actorb2,   // M x 1
  CriticW1,  // hidden x (d_s + M)
  Criticb1,  // hidden x 1
  CriticW2,  // 1 x hidden
  Criticb2,  // 1 x 1
};
inline constexpr std::size_t kNumParams = 12;

std::string_view param_name(ParamId id);
std::optional<ParamId> param_from_name(std::string_view name);
constexpr std::size_t index_of(ParamId id) { return static_cast<std::size_t>(id); }
constexpr ParamId param_at(std::size_t i) { return static_cast<ParamId>(i); }

bool is_actor_param(ParamId id);
bool is_critic_param(ParamId id);
// Embeddings, the attention transform, and the signature map.
bool is_shared_param(ParamId id);

// Every learnable tensor of the model. Gradients use the same type, so a
// gradient structure always mirrors the parameter shapes.
class ParameterSet {
 public:
  ParameterSet() = default;

  static ParameterSet zeros(const NetworkDims& dims);
  // Weights and embeddings ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases 0.
  static ParameterSet initialize(const NetworkDims& dims, std::uint64_t seed);

  const NetworkDims& dims() const noexcept { return dims_; }
  std::uint64_t seed() const noexcept { return seed_; }
  void set_seed(std::uint64_t seed) noexcept { seed_ = seed; }

  Matrix& operator[](ParamId id) { return tensors_[index_of(id)]; }
  const Matrix& operator[](ParamId id) const { return tensors_[index_of(id)]; }

  // this += alpha * other, tensor by tensor.
  void axpy(double alpha, const ParameterSet& other);
  void scale(double alpha);
  bool all_finite() const;
  std::size_t num_scalars() const;
  double squared_norm() const;

  // Exact equality of dims and every entry.
  friend bool operator==(const ParameterSet& a, const ParameterSet& b);

 private:
  NetworkDims dims_{};
  std::uint64_t seed_{0};
  std::array<Matrix, kNumParams> tensors_{};
};

// Rescales g so its global L2 norm is at most max_norm (> 0). Returns the
// norm before clipping.
double clip_global_norm(ParameterSet& g, double max_norm);

// Adam moment estimates for one ParameterSet shape.
class AdamState {
 public:
  AdamState() = default;
  AdamState(const NetworkDims& dims, double beta1 = 0.9, double beta2 = 0.999,
            double epsilon = 1e-8);

  // params -= lr * m_hat / (sqrt(v_hat) + epsilon)
  void step(ParameterSet& params, const ParameterSet& gradient, double lr);
  long steps() const noexcept { return t_; }

 private:
  ParameterSet m_;
  ParameterSet v_;
  double beta1_{0.9};
  double beta2_{0.999};
  double epsilon_{1e-8};
  long t_{0};
};

// Registers the tensors of a ParameterSet as tape leaves on first use.
class BoundParameters {
 public:
  BoundParameters(Tape& tape, const ParameterSet& params);

  Var operator[](ParamId id);
  Tape& tape() noexcept { return *tape_; }
  const ParameterSet& params() const noexcept { return *params_; }

  // Reads d(root)/d(tensor) after tape().backward(root); zeros for tensors
  // that were never used.
  ParameterSet collect_gradients() const;

 private:
  Tape* tape_;
  const ParameterSet* params_;
  std::array<std::optional<Var>, kNumParams> leaves_{};
};

// Exact partial derivatives of a scalar loss w.r.t. every parameter entry.
// Throws std::domain_error for a non-finite loss.
ParameterSet gradient(BoundParameters& bound, const Var& loss);

}  // namespace melanie::nn
