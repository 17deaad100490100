#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "melanie/graph/synthetic.hpp"
#include "melanie/meta/meta_losses.hpp"
#include "melanie/meta/meta_train.hpp"
#include "melanie/meta/signature_buffer.hpp"
#include "oracles.hpp"

using namespace melanie;
using meta::SignatureBuffer;

namespace {

nn::GraphSignature sig(std::vector<double> v, std::string id) {
  nn::Vector x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i];
  return {x, std::move(id)};
}

std::vector<graph::Task> tiny_tasks(int n) {
  graph::SyntheticEventConfig c;
  c.num_offices = 2;
  c.viewers_per_office = 4;
  c.duration_minutes = 6;
  c.interactions_per_minute = 8;
  std::vector<graph::Task> tasks;
  for (int i = 0; i < n; ++i) {
    tasks.push_back(graph::split_task(
        graph::normalize_throughput(
            graph::generate_synthetic_event(c, 50 + i, "ev" + std::to_string(i))),
        0.8));
  }
  return tasks;
}

meta::EnvironmentFactory replay_factory() {
  return [](const graph::Task& t, env::Phase phase, std::uint64_t) {
    return env::StreamingEnvironment::replay(t, phase);
  };
}

}  // namespace

TEST(SignatureBuffer, FifoWithReplacement) {
  SignatureBuffer b(2);
  b.push(sig({1, 0}, "a"));
  b.push(sig({0, 1}, "b"));
  b.push(sig({2, 2}, "a"));
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b.entries()[0].event_id, "a");
  EXPECT_EQ(b.entries()[0].values(0), 2.0);
  b.push(sig({3, 3}, "c"));
  EXPECT_FALSE(b.contains("a"));
  EXPECT_TRUE(b.contains("b"));
  EXPECT_TRUE(b.contains("c"));
  EXPECT_THROW(SignatureBuffer(0), std::invalid_argument);
}

TEST(SignatureBuffer, JsonRoundTripIsExact) {
  SignatureBuffer b(4);
  b.push(sig({0.1 + 0.2, -1e-300, 7.0}, "x"));
  b.push(sig({1.0 / 3.0, 2.0, 0.0}, "y"));
  const SignatureBuffer back = SignatureBuffer::from_json(b.to_json());
  EXPECT_EQ(back.capacity(), 4u);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back.entries()[i].event_id, b.entries()[i].event_id);
    EXPECT_EQ(back.entries()[i].values, b.entries()[i].values);
  }
}

TEST(Divergence, SoftmaxKlOfHandExample) {
  SignatureBuffer b(4);
  b.push(sig({0, 1}, "other"));
  const double d = meta::signature_divergence(sig({1, 0}, "me"), b);
  const double expected =
      melanie::testing::direct_kl(melanie::testing::softmax({1, 0}), melanie::testing::softmax({0, 1}));
  EXPECT_NEAR(d, expected, 1e-14);
  EXPECT_NEAR(d, 0.4621, 5e-5);
}

TEST(Divergence, SkipsOwnEventAndAverages) {
  SignatureBuffer b(4);
  EXPECT_EQ(meta::signature_divergence(sig({1, 0}, "me"), b), 0.0);
  b.push(sig({5, 5}, "me"));
  EXPECT_EQ(meta::signature_divergence(sig({1, 0}, "me"), b), 0.0);
  b.push(sig({0, 1}, "p"));
  b.push(sig({0, 3}, "q"));
  const auto s = melanie::testing::softmax({1, 0});
  const double expected = 0.5 * (melanie::testing::direct_kl(s, melanie::testing::softmax({0, 1})) +
                                 melanie::testing::direct_kl(s, melanie::testing::softmax({0, 3})));
  EXPECT_NEAR(meta::signature_divergence(sig({1, 0}, "me"), b), expected, 1e-14);
  EXPECT_THROW(meta::signature_divergence(sig({1, 0, 0}, "me"), b), std::invalid_argument);
}

TEST(Divergence, GradientMatchesFiniteDifferences) {
  const nn::NetworkDims dims{4, 8, 6, 8};
  const nn::ParameterSet p = nn::ParameterSet::initialize(dims, 4);
  SignatureBuffer b(8);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int j = 0; j < 3; ++j) {
    std::vector<double> v(16);
    for (double& x : v) x = n(rng);
    b.push(sig(v, "e" + std::to_string(j)));
  }
  const std::vector<graph::ViewerId> active{0, 2, 3, 5};
  auto f = [&](const nn::ParameterSet& at) {
    return meta::signature_divergence(nn::compute_signature(at, active, "me"), b);
  };
  nn::Tape tape;
  nn::BoundParameters bound(tape, p);
  const nn::Var d = meta::signature_divergence_expr(nn::signature(bound, active), "me", b);
  EXPECT_NEAR(d.scalar(), f(p), 1e-14);
  const auto analytic = nn::gradient(bound, d);
  EXPECT_LT(melanie::testing::relative_error(analytic, melanie::testing::finite_difference(f, p)), 1e-4);
}

TEST(MetaLosses, TotalsAreTaskPlusWeightedDivergence) {
  const nn::ParameterSet p = nn::ParameterSet::initialize(nn::NetworkDims{2, 2, 3, 4}, 9);
  agent::Transition t;
  t.viewer = 0;
  t.neighbors = {{1, 0.3}};
  t.chosen = 2;
  t.event_viewers = 3;
  t.reward = 0.7;
  const std::vector<agent::Transition> batch{t};
  agent::LossContext ctx;
  ctx.active_viewers = {0, 1, 2};
  SignatureBuffer b(2);
  b.push(sig({0.3, -0.2, 0.9, 0.1}, "other"));
  const meta::SignatureTerm term{"me", &b, -1.0};
  const auto actor = meta::meta_actor_loss(p, batch, ctx, term);
  const auto critic = meta::meta_critic_loss(p, batch, ctx, term);
  EXPECT_NEAR(actor.task, agent::actor_loss(p, batch, ctx), 1e-15);
  EXPECT_NEAR(critic.task, agent::critic_loss(p, batch, ctx), 1e-15);
  EXPECT_GT(actor.divergence, 0.0);
  EXPECT_NEAR(actor.total, actor.task - actor.divergence, 1e-15);
  EXPECT_NEAR(critic.total, critic.task - critic.divergence, 1e-15);

  const auto g = meta::meta_gradient(p, batch, ctx, term);
  EXPECT_NEAR(g.actor.total, actor.total, 1e-14);
  EXPECT_NEAR(g.critic.total, critic.total, 1e-14);
  // Without a buffer the meta losses reduce to the task losses.
  const auto plain = meta::meta_actor_loss(p, batch, ctx, meta::SignatureTerm{"me", nullptr, 1.0});
  EXPECT_EQ(plain.divergence, 0.0);
}

TEST(MetaGradient, MatchesFiniteDifferencesOfSummedLosses) {
  const nn::NetworkDims dims{4, 8, 6, 8};
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const nn::ParameterSet p = nn::ParameterSet::initialize(dims, 77);
  std::vector<agent::Transition> batch;
  for (int i = 0; i < 3; ++i) {
    agent::Transition t;
    t.viewer = static_cast<graph::ViewerId>(i);
    t.neighbors = {{static_cast<graph::ViewerId>(i + 1), u(rng)}, {5, u(rng)}};
    t.chosen = 4;
    t.event_viewers = 6;
    t.reward = u(rng);
    batch.push_back(t);
  }
  agent::LossContext ctx;
  ctx.active_viewers = {0, 1, 2, 3, 4, 5};
  SignatureBuffer b(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int j = 0; j < 2; ++j) {
    std::vector<double> v(16);
    for (double& x : v) x = n(rng);
    b.push(sig(v, "e" + std::to_string(j)));
  }
  const meta::SignatureTerm term{"me", &b, 1.0};
  const auto frozen = agent::evaluate_batch(p, batch, ctx);
  auto f = [&](const nn::ParameterSet& at) {
    nn::Tape tape(false);
    nn::BoundParameters bound(tape, at);
    return (meta::meta_actor_loss_expr(bound, batch, ctx, frozen, term) +
            meta::meta_critic_loss_expr(bound, batch, ctx, frozen, term))
        .scalar();
  };
  const auto g = meta::meta_gradient(p, batch, ctx, term);
  EXPECT_LT(melanie::testing::relative_error(g.gradient, melanie::testing::finite_difference(f, p)), 1e-4);
}

TEST(MetaTrain, DeterministicAndStoresSignatures) {
  const auto tasks = tiny_tasks(3);
  meta::MetaConfig mc;
  mc.epochs = 2;
  mc.seed = 4;
  agent::TrainConfig train;
  train.K = 8;
  train.seed = 4;
  const nn::NetworkDims dims{4, 4, 8, 8};
  const auto a = meta::meta_train(tasks, mc, train, dims, replay_factory());
  const auto b = meta::meta_train(tasks, mc, train, dims, replay_factory());
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.epochs_run, 2);
  EXPECT_EQ(a.log.size(), 6u);
  EXPECT_EQ(a.buffer.size(), 3u);
  for (const auto& t : tasks) EXPECT_TRUE(a.buffer.contains(t.network.event_id()));
  EXPECT_FALSE(a.params == nn::ParameterSet::initialize(dims, mc.seed));
}

TEST(MetaTrain, FrozenEmbeddingsStayAtInit) {
  const auto tasks = tiny_tasks(2);
  meta::MetaConfig mc;
  mc.epochs = 2;
  mc.freeze_embeddings_per_task = true;
  agent::TrainConfig train;
  train.K = 8;
  const nn::NetworkDims dims{4, 4, 8, 8};
  const nn::ParameterSet init = nn::ParameterSet::initialize(dims, 1);
  const auto r = meta::meta_train(tasks, mc, train, dims, replay_factory(), {}, init);
  EXPECT_EQ(r.params[nn::ParamId::X], init[nn::ParamId::X]);
  EXPECT_NE(r.params[nn::ParamId::W_S], init[nn::ParamId::W_S]);
}

TEST(MetaTrain, EarlyStoppingReturnsBestEpoch) {
  const auto tasks = tiny_tasks(2);
  meta::MetaConfig mc;
  mc.epochs = 10;
  mc.patience = 2;
  agent::TrainConfig train;
  train.K = 8;
  const nn::NetworkDims dims{4, 4, 8, 8};
  // Scores get worse after the first epoch.
  int calls = 0;
  std::vector<nn::ParameterSet> seen;
  const meta::ValidationScore score = [&](const nn::ParameterSet& p) {
    seen.push_back(p);
    return static_cast<double>(++calls);
  };
  const auto r = meta::meta_train(tasks, mc, train, dims, replay_factory(), score);
  EXPECT_EQ(r.epochs_run, 3);
  EXPECT_EQ(r.validation.size(), 3u);
  ASSERT_FALSE(seen.empty());
  EXPECT_EQ(r.params, seen.front());
  EXPECT_EQ(r.best_epoch, 1);
}

TEST(MetaConfig, Validation) {
  meta::MetaConfig mc;
  EXPECT_NO_THROW(meta::validate(mc));
  mc.optimizer = "rmsprop";
  EXPECT_THROW(meta::validate(mc), std::invalid_argument);
  mc.optimizer = "adam";
  mc.epochs = 0;
  EXPECT_THROW(meta::validate(mc), std::invalid_argument);
}
