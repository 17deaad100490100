#include "melanie/nn/parameters.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace melanie::nn {
namespace {

constexpr std::array<std::string_view, kNumParams> kNames = {
    "X",        "W_S",      "W_H",      "b_H",      "theta.W1", "theta.b1",
    "theta.W2", "theta.b2", "w.W1",     "w.b1",     "w.W2",     "w.b2",
};

struct Shape {
  Eigen::Index rows;
  Eigen::Index cols;
  Eigen::Index fan_in;  // 0 for biases
};

Shape shape_of(ParamId id, const NetworkDims& d) {
  const Eigen::Index m = d.max_viewers;
  const Eigen::Index e = d.embedding;
  const Eigen::Index s = d.state;
  const Eigen::Index h = d.hidden;
  switch (id) {
    case ParamId::X: return {m, e, e};
    case ParamId::W_S: return {s, e, e};
    case ParamId::W_H: return {2 * s, e, e};
    case ParamId::b_H: return {2 * s, 1, 0};
    case ParamId::ActorW1: return {h, s, s};
    case ParamId::Actorb1: return {h, 1, 0};
    case ParamId::ActorW2: return {m, h, h};
    case ParamId::Actorb2: return {m, 1, 0};
    case ParamId::CriticW1: return {h, s + m, s + m};
    case ParamId::Criticb1: return {h, 1, 0};
    case ParamId::CriticW2: return {1, h, h};
    case ParamId::Criticb2: return {1, 1, 0};
  }
  throw std::logic_error("unknown parameter id");
}

}  // namespace

void validate(const NetworkDims& d) {
  if (d.embedding <= 0 || d.state <= 0 || d.max_viewers <= 0 || d.hidden <= 0) {
    throw std::invalid_argument("network dims must all be positive");
  }
}

std::string_view param_name(ParamId id) { return kNames[index_of(id)]; }

std::optional<ParamId> param_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumParams; ++i) {
    if (kNames[i] == name) return param_at(i);
  }
  return std::nullopt;
}

bool is_actor_param(ParamId id) {
  return id == ParamId::ActorW1 || id == ParamId::Actorb1 || id == ParamId::ActorW2 ||
         id == ParamId::Actorb2;
}

bool is_critic_param(ParamId id) {
  return id == ParamId::CriticW1 || id == ParamId::Criticb1 || id == ParamId::CriticW2 ||
         id == ParamId::Criticb2;
}

bool is_shared_param(ParamId id) { return !is_actor_param(id) && !is_critic_param(id); }

ParameterSet ParameterSet::zeros(const NetworkDims& dims) {
  validate(dims);
  ParameterSet p;
  p.dims_ = dims;
  for (std::size_t i = 0; i < kNumParams; ++i) {
    const Shape s = shape_of(param_at(i), dims);
    p.tensors_[i] = Matrix::Zero(s.rows, s.cols);
  }
  return p;
}

ParameterSet ParameterSet::initialize(const NetworkDims& dims, std::uint64_t seed) {
  ParameterSet p = zeros(dims);
  p.seed_ = seed;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < kNumParams; ++i) {
    const Shape s = shape_of(param_at(i), dims);
    if (s.fan_in == 0) continue;
    const double bound = 1.0 / std::sqrt(static_cast<double>(s.fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix& t = p.tensors_[i];
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = dist(rng);
    }
  }
  return p;
}

void ParameterSet::axpy(double alpha, const ParameterSet& other) {
  if (!(dims_ == other.dims_)) throw std::invalid_argument("axpy: dims mismatch");
  for (std::size_t i = 0; i < kNumParams; ++i) tensors_[i] += alpha * other.tensors_[i];
}

void ParameterSet::scale(double alpha) {
  for (auto& t : tensors_) t *= alpha;
}

bool ParameterSet::all_finite() const {
  for (const auto& t : tensors_) {
    if (!t.allFinite()) return false;
  }
  return true;
}

std::size_t ParameterSet::num_scalars() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += static_cast<std::size_t>(t.size());
  return n;
}

double ParameterSet::squared_norm() const {
  double s = 0.0;
  for (const auto& t : tensors_) s += t.squaredNorm();
  return s;
}

double clip_global_norm(ParameterSet& g, double max_norm) {
  if (!(max_norm > 0.0)) throw std::invalid_argument("clip_global_norm: max_norm must be > 0");
  const double norm = std::sqrt(g.squared_norm());
  if (norm > max_norm) g.scale(max_norm / norm);
  return norm;
}

AdamState::AdamState(const NetworkDims& dims, double beta1, double beta2, double epsilon)
    : m_(ParameterSet::zeros(dims)),
      v_(ParameterSet::zeros(dims)),
      beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon) {
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("adam: betas must be in [0,1)");
  }
}

void AdamState::step(ParameterSet& params, const ParameterSet& g, double lr) {
  if (!(params.dims() == m_.dims()) || !(g.dims() == m_.dims())) {
    throw std::invalid_argument("adam: shape mismatch");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < kNumParams; ++i) {
    const ParamId id = param_at(i);
    m_[id] = beta1_ * m_[id] + (1.0 - beta1_) * g[id];
    v_[id] = beta2_ * v_[id] + (1.0 - beta2_) * g[id].cwiseProduct(g[id]);
    params[id].array() -=
        lr * (m_[id].array() / c1) / ((v_[id].array() / c2).sqrt() + epsilon_);
  }
}

bool operator==(const ParameterSet& a, const ParameterSet& b) {
  if (!(a.dims_ == b.dims_)) return false;
  for (std::size_t i = 0; i < kNumParams; ++i) {
    const Matrix& x = a.tensors_[i];
    const Matrix& y = b.tensors_[i];
    if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if (x.data()[k] != y.data()[k]) return false;
    }
  }
  return true;
}

BoundParameters::BoundParameters(Tape& tape, const ParameterSet& params)
    : tape_(&tape), params_(&params) {}

Var BoundParameters::operator[](ParamId id) {
  auto& slot = leaves_[index_of(id)];
  if (!slot) slot = tape_->leaf((*params_)[id]);
  return *slot;
}

ParameterSet BoundParameters::collect_gradients() const {
  ParameterSet g = ParameterSet::zeros(params_->dims());
  for (std::size_t i = 0; i < kNumParams; ++i) {
    if (leaves_[i]) g[param_at(i)] = tape_->grad(*leaves_[i]);
  }
  return g;
}

ParameterSet gradient(BoundParameters& bound, const Var& loss) {
  const double value = loss.scalar();
  if (!std::isfinite(value)) {
    throw std::domain_error("gradient: loss is not finite (" + std::to_string(value) + ")");
  }
  bound.tape().backward(loss);
  ParameterSet g = bound.collect_gradients();
  if (!g.all_finite()) throw std::domain_error("gradient: non-finite partial derivative");
  return g;
}

}  // namespace melanie::nn
