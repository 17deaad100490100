#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "melanie/nn/checkpoint.hpp"
#include "melanie/nn/model.hpp"
#include "melanie/nn/parameters.hpp"
#include "oracles.hpp"

using namespace melanie::nn;
using melanie::testing::direct_elu;

namespace {

NetworkDims tiny() { return NetworkDims{1, 1, 3, 2}; }

ParameterSet filled(const NetworkDims& dims, double value) {
  ParameterSet p = ParameterSet::zeros(dims);
  for (std::size_t i = 0; i < kNumParams; ++i) p[param_at(i)].setConstant(value);
  return p;
}

}  // namespace

TEST(Parameters, InitializationIsUniformWithinFanIn) {
  const NetworkDims dims{4, 8, 6, 8};
  const ParameterSet p = ParameterSet::initialize(dims, 42);
  EXPECT_EQ(p, ParameterSet::initialize(dims, 42));
  EXPECT_FALSE(p == ParameterSet::initialize(dims, 43));
  auto bound = [](const Matrix& m) { return 1.0 / std::sqrt(static_cast<double>(m.cols())); };
  for (ParamId id : {ParamId::X, ParamId::W_S, ParamId::W_H, ParamId::ActorW1, ParamId::ActorW2,
                     ParamId::CriticW1, ParamId::CriticW2}) {
    EXPECT_LE(p[id].cwiseAbs().maxCoeff(), bound(p[id])) << param_name(id);
    EXPECT_GT(p[id].cwiseAbs().maxCoeff(), 0.0) << param_name(id);
  }
  for (ParamId id : {ParamId::b_H, ParamId::Actorb1, ParamId::Actorb2, ParamId::Criticb1,
                     ParamId::Criticb2}) {
    EXPECT_TRUE(p[id].isZero()) << param_name(id);
  }
  EXPECT_EQ(p[ParamId::X].rows(), 6);
  EXPECT_EQ(p[ParamId::W_H].rows(), 16);
  EXPECT_EQ(p[ParamId::CriticW1].cols(), 8 + 6);
  EXPECT_THROW(ParameterSet::initialize(NetworkDims{0, 1, 1, 1}, 1), std::invalid_argument);
}

TEST(Parameters, NamesRoundTrip) {
  for (std::size_t i = 0; i < kNumParams; ++i) {
    EXPECT_EQ(param_from_name(param_name(param_at(i))), param_at(i));
  }
  EXPECT_FALSE(param_from_name("nope").has_value());
}

TEST(Parameters, ClipAndAdam) {
  ParameterSet g = filled(tiny(), 1.0);
  const double before = clip_global_norm(g, 0.5);
  EXPECT_NEAR(before, std::sqrt(static_cast<double>(g.num_scalars())), 1e-12);
  EXPECT_NEAR(std::sqrt(g.squared_norm()), 0.5, 1e-12);

  // The first bias-corrected Adam step moves every entry by lr * sign(g).
  ParameterSet p = ParameterSet::zeros(tiny());
  AdamState adam(tiny());
  ParameterSet grad = filled(tiny(), -3.0);
  adam.step(p, grad, 0.01);
  EXPECT_NEAR(p[ParamId::X](0, 0), 0.01, 1e-9);
  EXPECT_EQ(adam.steps(), 1);
}

TEST(Embedding, LooksUpRow) {
  ParameterSet p = ParameterSet::initialize(NetworkDims{3, 2, 4, 2}, 1);
  for (ViewerId u = 0; u < 4; ++u) EXPECT_EQ(embed(p, u), Vector(p[ParamId::X].row(u).transpose()));
  EXPECT_THROW(embed(p, 4), std::invalid_argument);
}

TEST(Signature, MeanPoolsActiveViewers) {
  const NetworkDims dims{3, 2, 5, 2};
  const ParameterSet p = ParameterSet::initialize(dims, 7);
  const Matrix& X = p[ParamId::X];
  const Matrix& W = p[ParamId::W_H];
  const std::vector<ViewerId> active{1, 3};
  const GraphSignature H = compute_signature(p, active, "ev");
  ASSERT_EQ(H.values.size(), 4);
  EXPECT_EQ(H.event_id, "ev");
  for (int r = 0; r < 4; ++r) {
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) acc += W(r, c) * (X(1, c) + X(3, c)) / 2.0;
    EXPECT_NEAR(H.values(r), direct_elu(acc + p[ParamId::b_H](r, 0)), 1e-14);
  }
  const std::vector<ViewerId> one{2};
  const GraphSignature single = compute_signature(p, one);
  for (int r = 0; r < 4; ++r) {
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) acc += W(r, c) * X(2, c);
    EXPECT_NEAR(single.values(r), direct_elu(acc), 1e-14);
  }
  EXPECT_TRUE(compute_signature(ParameterSet::zeros(dims), active).values.isZero());
  EXPECT_THROW(compute_signature(p, std::vector<ViewerId>{}), std::invalid_argument);
}

TEST(Attention, HandEvaluatedScore) {
  ParameterSet p = ParameterSet::zeros(NetworkDims{1, 1, 2, 1});
  p[ParamId::W_S](0, 0) = 2.0;
  p[ParamId::X](0, 0) = 0.5;
  p[ParamId::X](1, 0) = 1.0;
  const GraphSignature H{Vector::Ones(2), "ev"};
  EXPECT_DOUBLE_EQ(attention_score(p, H, 0, 1, 0.5), 1.5);
  EXPECT_DOUBLE_EQ(attention_score(p, H, 0, 1, 0.0), 0.0);
  // Negative inner products go through the 0.2 slope.
  p[ParamId::X](1, 0) = -3.0;
  EXPECT_DOUBLE_EQ(attention_score(p, H, 0, 1, 0.5), 0.2 * 0.5 * (1.0 - 6.0));
  EXPECT_THROW(attention_score(p, H, 1, 1, 0.5), std::invalid_argument);
}

TEST(StateEncoding, CoefficientsAreSoftmaxOfScores) {
  ParameterSet p = ParameterSet::zeros(NetworkDims{1, 1, 3, 1});
  p[ParamId::W_S](0, 0) = 1.0;
  p[ParamId::X](1, 0) = 2.0;
  Vector h(2);
  h << 0.0, 1.0;
  const GraphSignature H{h, "ev"};
  const std::vector<Neighbor> nb{{1, 1.0}, {2, 1.0}};
  const StateEncoding s = encode_state(p, H, 0, nb);
  const double e2 = std::exp(2.0);
  ASSERT_EQ(s.coefficients.size(), 2);
  EXPECT_NEAR(s.coefficients(0), e2 / (e2 + 1.0), 1e-15);
  EXPECT_NEAR(s.coefficients(1), 1.0 / (e2 + 1.0), 1e-15);
  EXPECT_NEAR(s.coefficients(0), 0.8808, 5e-5);
  // Default aggregation: ELU(sum_v c_v W_S X_v).
  EXPECT_NEAR(s.state(0), direct_elu(2.0 * e2 / (e2 + 1.0)), 1e-14);
}

TEST(StateEncoding, EmptyNeighborhoodFallsBackToSelf) {
  ParameterSet p = ParameterSet::initialize(NetworkDims{3, 2, 4, 2}, 3);
  const GraphSignature H = compute_signature(p, std::vector<ViewerId>{0, 1, 2, 3});
  const StateEncoding s = encode_state(p, H, 2, {});
  EXPECT_EQ(s.coefficients.size(), 0);
  const Vector z = p[ParamId::W_S] * p[ParamId::X].row(2).transpose();
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(s.state(i), direct_elu(z(i)), 1e-15);
}

TEST(StateEncoding, LiteralModeCollapsesToSelf) {
  ParameterSet p = ParameterSet::initialize(NetworkDims{3, 2, 4, 2}, 3);
  const GraphSignature H = compute_signature(p, std::vector<ViewerId>{0, 1, 2, 3});
  const std::vector<Neighbor> nb{{0, 0.3}, {3, 0.9}};
  const StateEncoding literal = encode_state(p, H, 1, nb, EncoderOptions{true});
  const Vector z = p[ParamId::W_S] * p[ParamId::X].row(1).transpose();
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(literal.state(i), direct_elu(z(i)), 1e-14);
  EXPECT_THROW(encode_state(p, H, 1, std::vector<Neighbor>{{1, 0.5}}), std::invalid_argument);
}

TEST(Actor, ZeroWeightsGiveUniformOverMask) {
  const ParameterSet p = ParameterSet::zeros(NetworkDims{2, 2, 6, 3});
  const ActionMask mask = make_action_mask(6, 4, 1);
  const Vector a = actor_forward(p, Vector::Ones(2), mask);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(a(i), mask[i] ? 1.0 / 3.0 : 0.0, 1e-15);
  EXPECT_THROW(make_action_mask(6, 7, 0), std::invalid_argument);
  EXPECT_THROW(actor_forward(p, Vector::Ones(3), mask), std::invalid_argument);
}

TEST(Critic, TinyNetForwardPass) {
  const ParameterSet p = filled(NetworkDims{1, 1, 2, 2}, 0.1);
  Vector s(1);
  s << 1.0;
  Vector a(2);
  a << 1.0, 0.0;
  // Independent evaluation of w2 . ELU(W1 [s; a] + b1) + b2.
  const double in[3] = {1.0, 1.0, 0.0};
  double q = 0.1;
  for (int h = 0; h < 2; ++h) {
    double pre = 0.1;
    for (double x : in) pre += 0.1 * x;
    q += 0.1 * direct_elu(pre);
  }
  EXPECT_NEAR(critic_forward(p, s, a), q, 1e-15);
  EXPECT_THROW(critic_forward(p, s, Vector::Ones(3)), std::invalid_argument);
}

TEST(Gradient, CriticForwardMatchesFiniteDifferences) {
  const NetworkDims dims{4, 8, 6, 8};
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const ParameterSet p = ParameterSet::initialize(dims, rng());
    std::normal_distribution<double> n(0.0, 1.0);
    Vector s(8);
    Vector a(6);
    for (int i = 0; i < 8; ++i) s(i) = n(rng);
    for (int i = 0; i < 6; ++i) a(i) = std::abs(n(rng));
    Tape tape;
    BoundParameters bound(tape, p);
    const Var q = critic_value(bound, tape.constant(s), tape.constant(a));
    const ParameterSet analytic = gradient(bound, q);
    const ParameterSet numeric = melanie::testing::finite_difference(
        [&](const ParameterSet& at) { return critic_forward(at, s, a); }, p);
    EXPECT_LT(melanie::testing::relative_error(analytic, numeric), 1e-4);
  }
}

TEST(Gradient, LinearLossOnEmbeddingRow) {
  ParameterSet p = ParameterSet::initialize(NetworkDims{3, 2, 4, 2}, 1);
  Tape tape;
  BoundParameters bound(tape, p);
  const ParameterSet g = gradient(bound, sum(embed(bound, 2)));
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 3; ++c) EXPECT_EQ(g[ParamId::X](r, c), r == 2 ? 1.0 : 0.0);
  }
  EXPECT_TRUE(g[ParamId::W_S].isZero());
}

TEST(Gradient, RejectsNonFiniteLoss) {
  ParameterSet p = ParameterSet::initialize(NetworkDims{3, 2, 4, 2}, 1);
  p[ParamId::X](0, 0) = std::numeric_limits<double>::infinity();
  Tape tape;
  BoundParameters bound(tape, p);
  EXPECT_THROW(gradient(bound, sum(embed(bound, 0))), std::domain_error);
}

TEST(Checkpoint, SaveLoadIsExact) {
  ParameterSet p = ParameterSet::initialize(NetworkDims{3, 5, 7, 4}, 99);
  p[ParamId::Criticb2](0, 0) = 0.1 + 0.2;
  const auto file = std::filesystem::temp_directory_path() / "melanie-ckpt-test.json";
  save_checkpoint(file, p);
  const ParameterSet back = load_checkpoint(file, p.dims());
  EXPECT_EQ(back, p);
  EXPECT_EQ(back.seed(), p.seed());
  EXPECT_THROW(load_checkpoint(file, NetworkDims{3, 5, 8, 4}), std::runtime_error);
  std::filesystem::remove(file);
  EXPECT_THROW(checkpoint_from_string(R"({"format":"other"})"), std::runtime_error);
}
