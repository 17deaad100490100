#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <vector>

namespace melanie::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
// lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  double scalar() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  bool requires_grad() const;

  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_{nullptr};
  std::size_t id_{0};
};

/*
 * Reverse-mode differentiation over dense matrices.
 *
 * Nodes are appended in evaluation order, so reverse creation order is a
 * valid topological order for the backward sweep. A node only keeps its
 * backward closure when at least one input requires a gradient; a tape built
 * with record=false never keeps closures and serves as a plain evaluator.
 */
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& grad_out)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var leaf(Matrix value);
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward backward);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool recording() const noexcept { return record_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  // Adds g into the gradient slot of v. Called from backward closures.
  void accumulate(const Var& v, const Matrix& g);

  // Seeds d(root)/d(root) = 1 and sweeps. The root must be 1x1.
  void backward(const Var& root);

  // Gradient of the last backward root w.r.t. v (zeros if unreached).
  Matrix grad(const Var& v) const;

 private:
  struct Node {
    Matrix value;
    Backward backward;
    bool requires_grad{false};
  };

  bool record_;
  std::deque<Node> nodes_;
  std::vector<Matrix> grads_;
  std::vector<bool> reached_;
};

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(double s, const Var& a);

Var matmul(const Var& a, const Var& b);
Var cwise_product(const Var& a, const Var& b);
Var add_scalar(const Var& a, double c);
Var transpose(const Var& a);
Var elu(const Var& a);
Var leaky_relu(const Var& a, double negative_slope);
Var square(const Var& a);
Var exp(const Var& a);

Var sum(const Var& a);
// Replicates a 1x1 value into a rows x cols matrix.
Var broadcast(const Var& scalar, Eigen::Index rows, Eigen::Index cols);

Var gather_rows(const Var& a, std::vector<Eigen::Index> rows);
Var mean_rows(const Var& a);
Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index count);
Var vstack(const Var& top, const Var& bottom);

// Column-vector softmax restricted to mask-true entries; masked entries are
// exactly 0. At least one entry must be selectable.
Var masked_softmax(const Var& logits, const std::vector<bool>& mask);
// log softmax(logits)[index] over the mask-true entries.
Var masked_log_prob(const Var& logits, const std::vector<bool>& mask, Eigen::Index index);
Var log_softmax(const Var& logits);

Var detach(const Var& a);

}  // namespace melanie::nn
