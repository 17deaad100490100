#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>

#include "melanie/agent/losses.hpp"
#include "melanie/nn/model.hpp"

using namespace melanie;

namespace {

struct Fixture {
  nn::ParameterSet params = nn::ParameterSet::initialize(nn::NetworkDims{}, 1);
  std::vector<graph::ViewerId> active;
  std::vector<agent::Transition> batch;
  agent::LossContext ctx;

  explicit Fixture(std::size_t k) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (graph::ViewerId v = 0; v < 48; ++v) active.push_back(v);
    ctx.active_viewers = active;
    for (std::size_t i = 0; i < k; ++i) {
      agent::Transition t;
      t.viewer = static_cast<graph::ViewerId>(rng() % 48);
      for (int j = 0; j < 6; ++j) {
        const auto v = static_cast<graph::ViewerId>(rng() % 48);
        if (v != t.viewer) t.neighbors.push_back({v, u(rng)});
      }
      std::sort(t.neighbors.begin(), t.neighbors.end(),
                [](const auto& a, const auto& b) { return a.viewer < b.viewer; });
      t.neighbors.erase(std::unique(t.neighbors.begin(), t.neighbors.end(),
                                    [](const auto& a, const auto& b) { return a.viewer == b.viewer; }),
                        t.neighbors.end());
      t.chosen = (t.viewer + 1) % 48;
      t.event_viewers = 48;
      t.reward = u(rng);
      batch.push_back(t);
    }
  }
};

}  // namespace

static void BM_EncodeAndAct(benchmark::State& state) {
  Fixture f(1);
  const nn::GraphSignature H = nn::compute_signature(f.params, f.active);
  const nn::ActionMask mask = nn::make_action_mask(48, 48, f.batch[0].viewer);
  for (auto _ : state) {
    const auto s = nn::encode_state(f.params, H, f.batch[0].viewer, f.batch[0].neighbors);
    benchmark::DoNotOptimize(nn::actor_forward(f.params, s.state, mask));
  }
}
BENCHMARK(BM_EncodeAndAct);

static void BM_ActorGradient(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(agent::actor_loss_gradient(f.params, f.batch, f.ctx).loss);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ActorGradient)->Arg(8)->Arg(32);

static void BM_CriticGradient(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(agent::critic_loss_gradient(f.params, f.batch, f.ctx).loss);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CriticGradient)->Arg(8)->Arg(32);
