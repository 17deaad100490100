#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "melanie/nn/autodiff.hpp"
#include "oracles.hpp"

using namespace melanie::nn;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

// Checks d f(x) / dx for a scalar expression of one leaf.
void check_unary(const std::function<Var(const Var&)>& f, Matrix x, double tol = 1e-6) {
  Tape tape;
  Var leaf = tape.leaf(x);
  Var y = f(leaf);
  tape.backward(y);
  const Matrix analytic = tape.grad(leaf);

  auto eval = [&](const Matrix& at) {
    Tape t(false);
    return f(t.constant(at)).scalar();
  };
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Matrix up = x;
    Matrix down = x;
    up.data()[i] += h;
    down.data()[i] -= h;
    const double numeric = (eval(up) - eval(down)) / (2 * h);
    EXPECT_NEAR(analytic.data()[i], numeric, tol * std::max(1.0, std::abs(numeric))) << "entry " << i;
  }
}

}  // namespace

TEST(Tape, ConstantsCarryNoGradient) {
  Tape tape;
  Var c = tape.constant(Matrix::Ones(2, 1));
  Var l = tape.leaf(Matrix::Ones(2, 1));
  Var y = sum(cwise_product(c, l));
  tape.backward(y);
  EXPECT_FALSE(c.requires_grad());
  EXPECT_TRUE(l.requires_grad());
  EXPECT_EQ(tape.grad(l), Matrix::Ones(2, 1));
  EXPECT_EQ(tape.grad(c), Matrix::Zero(2, 1));
}

TEST(Tape, BackwardNeedsScalarRoot) {
  Tape tape;
  Var l = tape.leaf(Matrix::Ones(2, 1));
  EXPECT_THROW(tape.backward(l), std::invalid_argument);
}

TEST(Tape, SharedSubexpressionAccumulates) {
  Tape tape;
  Var x = tape.leaf(Matrix::Constant(1, 1, 3.0));
  Var y = cwise_product(x, x) + x;  // x^2 + x
  tape.backward(y);
  EXPECT_DOUBLE_EQ(tape.grad(x)(0, 0), 7.0);
}

TEST(Ops, ElementwiseGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(1);
  const Matrix x = random_matrix(4, 3, rng);
  check_unary([](const Var& v) { return sum(elu(v)); }, x);
  check_unary([](const Var& v) { return sum(leaky_relu(v, 0.2)); }, x);
  check_unary([](const Var& v) { return sum(square(v)); }, x);
  check_unary([](const Var& v) { return sum(exp(v)); }, x);
  check_unary([](const Var& v) { return sum(add_scalar(v, 2.0)); }, x);
  check_unary([](const Var& v) { return sum(3.0 * transpose(v)); }, x);
}

TEST(Ops, StructuralGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(2);
  const Matrix w = random_matrix(3, 4, rng);
  const Matrix x = random_matrix(4, 2, rng);
  check_unary([&](const Var& v) { return sum(square(matmul(v.tape().constant(w), v))); }, x);
  check_unary([&](const Var& v) { return sum(square(matmul(v, v.tape().constant(x)))); }, w);
  check_unary([](const Var& v) { return sum(square(gather_rows(v, {2, 0, 2}))); }, w);
  check_unary([](const Var& v) { return sum(square(mean_rows(v))); }, w);
  check_unary([](const Var& v) { return sum(square(slice_rows(v, 1, 2))); }, w);
  check_unary([](const Var& v) { return sum(square(vstack(v, v))); }, x);
  check_unary([](const Var& v) { return sum(square(broadcast(sum(v), 2, 3))); }, x);
}

TEST(Ops, DetachBlocksGradient) {
  Tape tape;
  Var x = tape.leaf(Matrix::Constant(1, 1, 3.0));
  Var y = cwise_product(detach(x), x);  // behaves like c * x with c = 3
  tape.backward(y);
  EXPECT_DOUBLE_EQ(y.scalar(), 9.0);
  EXPECT_DOUBLE_EQ(tape.grad(x)(0, 0), 3.0);
}

TEST(Ops, SoftmaxFamilyGradients) {
  std::mt19937_64 rng(3);
  const Matrix z = random_matrix(5, 1, rng);
  const std::vector<bool> mask{true, false, true, true, false};
  const Matrix g = random_matrix(5, 1, rng);
  check_unary([&](const Var& v) {
    return sum(cwise_product(v.tape().constant(g), masked_softmax(v, mask)));
  }, z);
  check_unary([&](const Var& v) { return masked_log_prob(v, mask, 3); }, z);
  check_unary([&](const Var& v) {
    return sum(cwise_product(v.tape().constant(g), log_softmax(v)));
  }, z);
}

TEST(Ops, MaskedSoftmaxContract) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix z = 10.0 * random_matrix(7, 1, rng);
    std::vector<bool> mask(7);
    bool any = false;
    for (std::size_t i = 0; i < mask.size(); ++i) any |= (mask[i] = (rng() % 2) == 0);
    if (!any) mask[rng() % 7] = true;
    Tape t(false);
    const Matrix p = masked_softmax(t.constant(z), mask).value();
    double total = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (!mask[i]) {
        EXPECT_EQ(p(i, 0), 0.0);
      } else {
        EXPECT_GE(p(i, 0), 0.0);
      }
      total += p(i, 0);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  Tape t(false);
  EXPECT_THROW(masked_softmax(t.constant(Matrix::Zero(2, 1)), {false, false}),
               std::invalid_argument);
  EXPECT_THROW(masked_log_prob(t.constant(Matrix::Zero(2, 1)), {true, false}, 1),
               std::invalid_argument);
}

TEST(Ops, LogProbMatchesDirectSoftmax) {
  const std::vector<double> z{0.3, -1.2, 2.5};
  const auto p = melanie::testing::softmax(z);
  Tape t(false);
  Matrix m(3, 1);
  m << z[0], z[1], z[2];
  EXPECT_NEAR(masked_log_prob(t.constant(m), {true, true, true}, 2).scalar(), std::log(p[2]),
              1e-12);
}

TEST(Ops, ShapeMismatchThrows) {
  Tape t;
  Var a = t.leaf(Matrix::Zero(2, 3));
  Var b = t.leaf(Matrix::Zero(2, 2));
  EXPECT_THROW(matmul(a, b), std::invalid_argument);
  EXPECT_THROW(a + b, std::invalid_argument);
  EXPECT_THROW(gather_rows(a, {5}), std::out_of_range);
}
