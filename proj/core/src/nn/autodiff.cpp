#include "melanie/nn/autodiff.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace melanie::nn {

const Matrix& Var::value() const {
  if (!tape_) throw std::logic_error("use of an unbound Var");
  return tape_->value(id_);
}

double Var::scalar() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw std::logic_error("Var is not a scalar");
  return v(0, 0);
}

bool Var::requires_grad() const { return tape_ && tape_->requires_grad(id_); }

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(Matrix value) {
  nodes_.push_back(Node{std::move(value), nullptr, record_});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
  bool needs = false;
  for (const Var& in : inputs) {
    if (in.tape_ != this) throw std::logic_error("mixing Vars from different tapes");
    needs = needs || nodes_[in.id_].requires_grad;
  }
  needs = needs && record_;
  nodes_.push_back(Node{std::move(value), needs ? std::move(backward) : nullptr, needs});
  return Var(this, nodes_.size() - 1);
}

void Tape::accumulate(const Var& v, const Matrix& g) {
  if (!nodes_[v.id_].requires_grad) return;
  if (!reached_[v.id_]) {
    grads_[v.id_] = g;
    reached_[v.id_] = true;
  } else {
    grads_[v.id_] += g;
  }
}

void Tape::backward(const Var& root) {
  if (root.tape_ != this) throw std::logic_error("root belongs to another tape");
  const Matrix& r = nodes_[root.id_].value;
  if (r.rows() != 1 || r.cols() != 1) throw std::invalid_argument("backward root must be 1x1");
  grads_.assign(nodes_.size(), Matrix());
  reached_.assign(nodes_.size(), false);
  if (!nodes_[root.id_].requires_grad) return;
  grads_[root.id_] = Matrix::Ones(1, 1);
  reached_[root.id_] = true;
  for (std::size_t i = root.id_ + 1; i-- > 0;) {
    if (!reached_[i] || !nodes_[i].backward) continue;
    nodes_[i].backward(*this, grads_[i]);
  }
}

Matrix Tape::grad(const Var& v) const {
  if (v.id_ < reached_.size() && reached_[v.id_]) return grads_[v.id_];
  const Matrix& val = nodes_[v.id_].value;
  return Matrix::Zero(val.rows(), val.cols());
}

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
  }
}

void require_column(const Var& a, const char* op) {
  if (a.cols() != 1) throw std::invalid_argument(std::string(op) + ": expects a column vector");
}

}  // namespace

Var operator+(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  return a.tape().record(a.value() + b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var operator-(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  return a.tape().record(a.value() - b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, -g);
  });
}

Var operator*(double s, const Var& a) {
  return a.tape().record(s * a.value(), {a},
                         [a, s](Tape& t, const Matrix& g) { t.accumulate(a, s * g); });
}

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
  return a.tape().record(a.value() * b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (a.requires_grad()) t.accumulate(a, g * b.value().transpose());
    if (b.requires_grad()) t.accumulate(b, a.value().transpose() * g);
  });
}

Var cwise_product(const Var& a, const Var& b) {
  require_same_shape(a, b, "cwise_product");
  return a.tape().record(a.value().cwiseProduct(b.value()), {a, b},
                         [a, b](Tape& t, const Matrix& g) {
                           if (a.requires_grad()) t.accumulate(a, g.cwiseProduct(b.value()));
                           if (b.requires_grad()) t.accumulate(b, g.cwiseProduct(a.value()));
                         });
}

Var add_scalar(const Var& a, double c) {
  return a.tape().record(a.value().array() + c, {a},
                         [a](Tape& t, const Matrix& g) { t.accumulate(a, g); });
}

Var transpose(const Var& a) {
  return a.tape().record(a.value().transpose(), {a},
                         [a](Tape& t, const Matrix& g) { t.accumulate(a, g.transpose()); });
}

Var elu(const Var& a) {
  Matrix out = a.value().unaryExpr([](double x) { return x > 0.0 ? x : std::expm1(x); });
  return a.tape().record(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
    Matrix d = a.value().unaryExpr([](double x) { return x > 0.0 ? 1.0 : std::exp(x); });
    t.accumulate(a, g.cwiseProduct(d));
  });
}

Var leaky_relu(const Var& a, double slope) {
  Matrix out = a.value().unaryExpr([slope](double x) { return x > 0.0 ? x : slope * x; });
  return a.tape().record(std::move(out), {a}, [a, slope](Tape& t, const Matrix& g) {
    Matrix d = a.value().unaryExpr([slope](double x) { return x > 0.0 ? 1.0 : slope; });
    t.accumulate(a, g.cwiseProduct(d));
  });
}

Var square(const Var& a) {
  return a.tape().record(a.value().array().square().matrix(), {a},
                         [a](Tape& t, const Matrix& g) {
                           t.accumulate(a, 2.0 * g.cwiseProduct(a.value()));
                         });
}

Var exp(const Var& a) {
  Matrix out = a.value().array().exp().matrix();
  return a.tape().record(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
    t.accumulate(a, g.cwiseProduct(a.value().array().exp().matrix()));
  });
}

Var sum(const Var& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  const Eigen::Index r = a.rows();
  const Eigen::Index c = a.cols();
  return a.tape().record(std::move(out), {a}, [a, r, c](Tape& t, const Matrix& g) {
    t.accumulate(a, Matrix::Constant(r, c, g(0, 0)));
  });
}

Var broadcast(const Var& scalar, Eigen::Index rows, Eigen::Index cols) {
  const double v = scalar.scalar();
  return scalar.tape().record(Matrix::Constant(rows, cols, v), {scalar},
                              [scalar](Tape& t, const Matrix& g) {
                                Matrix s(1, 1);
                                s(0, 0) = g.sum();
                                t.accumulate(scalar, s);
                              });
}

Var gather_rows(const Var& a, std::vector<Eigen::Index> rows) {
  const Matrix& src = a.value();
  Matrix out(static_cast<Eigen::Index>(rows.size()), src.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= src.rows()) throw std::out_of_range("gather_rows: bad row");
    out.row(static_cast<Eigen::Index>(i)) = src.row(rows[i]);
  }
  return a.tape().record(std::move(out), {a},
                         [a, rows = std::move(rows)](Tape& t, const Matrix& g) {
                           Matrix d = Matrix::Zero(a.rows(), a.cols());
                           for (std::size_t i = 0; i < rows.size(); ++i) {
                             d.row(rows[i]) += g.row(static_cast<Eigen::Index>(i));
                           }
                           t.accumulate(a, d);
                         });
}

Var mean_rows(const Var& a) {
  if (a.rows() == 0) throw std::invalid_argument("mean_rows: no rows");
  const double n = static_cast<double>(a.rows());
  Matrix out = a.value().colwise().sum() / n;
  return a.tape().record(std::move(out), {a}, [a, n](Tape& t, const Matrix& g) {
    t.accumulate(a, g.replicate(a.rows(), 1) / n);
  });
}

Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw std::out_of_range("slice_rows: range outside matrix");
  }
  Matrix out = a.value().middleRows(start, count);
  return a.tape().record(std::move(out), {a}, [a, start, count](Tape& t, const Matrix& g) {
    Matrix d = Matrix::Zero(a.rows(), a.cols());
    d.middleRows(start, count) = g;
    t.accumulate(a, d);
  });
}

Var vstack(const Var& top, const Var& bottom) {
  if (top.cols() != bottom.cols()) throw std::invalid_argument("vstack: column mismatch");
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out << top.value(), bottom.value();
  const Eigen::Index split = top.rows();
  return top.tape().record(std::move(out), {top, bottom},
                           [top, bottom, split](Tape& t, const Matrix& g) {
                             t.accumulate(top, g.topRows(split));
                             t.accumulate(bottom, g.bottomRows(g.rows() - split));
                           });
}

namespace {

// Probabilities over mask-true entries, exact zeros elsewhere.
Vector masked_probabilities(const Matrix& logits, const std::vector<bool>& mask) {
  const Eigen::Index n = logits.rows();
  double hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mask[static_cast<std::size_t>(i)]) hi = std::max(hi, logits(i, 0));
  }
  if (!std::isfinite(hi)) throw std::invalid_argument("masked softmax: no selectable entry");
  Vector p = Vector::Zero(n);
  double z = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mask[static_cast<std::size_t>(i)]) {
      p(i) = std::exp(logits(i, 0) - hi);
      z += p(i);
    }
  }
  return p / z;
}

void check_mask(const Var& logits, const std::vector<bool>& mask, const char* op) {
  require_column(logits, op);
  if (static_cast<Eigen::Index>(mask.size()) != logits.rows()) {
    throw std::invalid_argument(std::string(op) + ": mask length mismatch");
  }
}

}  // namespace

Var masked_softmax(const Var& logits, const std::vector<bool>& mask) {
  check_mask(logits, mask, "masked_softmax");
  Vector p = masked_probabilities(logits.value(), mask);
  Matrix out = p;
  return logits.tape().record(std::move(out), {logits}, [logits, p](Tape& t, const Matrix& g) {
    // dL/dz_i = p_i (g_i - sum_j p_j g_j); masked p_i = 0 drops those entries.
    const double inner = p.dot(g.col(0));
    Matrix d = (p.array() * (g.col(0).array() - inner)).matrix();
    t.accumulate(logits, d);
  });
}

Var masked_log_prob(const Var& logits, const std::vector<bool>& mask, Eigen::Index index) {
  check_mask(logits, mask, "masked_log_prob");
  if (index < 0 || index >= logits.rows() || !mask[static_cast<std::size_t>(index)]) {
    throw std::invalid_argument("masked_log_prob: index is not selectable");
  }
  const Matrix& z = logits.value();
  double hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    if (mask[static_cast<std::size_t>(i)]) hi = std::max(hi, z(i, 0));
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    if (mask[static_cast<std::size_t>(i)]) acc += std::exp(z(i, 0) - hi);
  }
  Matrix out(1, 1);
  out(0, 0) = z(index, 0) - hi - std::log(acc);
  Vector p = masked_probabilities(z, mask);
  return logits.tape().record(std::move(out), {logits},
                              [logits, p, index](Tape& t, const Matrix& g) {
                                Matrix d = -g(0, 0) * p;
                                d(index, 0) += g(0, 0);
                                t.accumulate(logits, d);
                              });
}

Var log_softmax(const Var& logits) {
  require_column(logits, "log_softmax");
  const Matrix& z = logits.value();
  const double hi = z.maxCoeff();
  const double lse = hi + std::log((z.array() - hi).exp().sum());
  Matrix out = (z.array() - lse).matrix();
  Vector p = out.col(0).array().exp().matrix();
  return logits.tape().record(std::move(out), {logits}, [logits, p](Tape& t, const Matrix& g) {
    Matrix d = g - p * g.sum();
    t.accumulate(logits, d);
  });
}

Var detach(const Var& a) { return a.tape().constant(a.value()); }

}  // namespace melanie::nn
