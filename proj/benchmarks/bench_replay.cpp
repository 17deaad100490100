#include <benchmark/benchmark.h>

#include <random>

#include "melanie/agent/replay.hpp"

using namespace melanie;

static void BM_PushWithPriority(benchmark::State& state) {
  agent::ReplayBuffer buffer(256);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (graph::ViewerId v = 0; v < 48; ++v) buffer.record_reward(v, u(rng), 0);
  for (auto _ : state) {
    agent::Transition t;
    t.viewer = static_cast<graph::ViewerId>(rng() % 48);
    buffer.push(std::move(t));
  }
}
BENCHMARK(BM_PushWithPriority);

static void BM_TopK(benchmark::State& state) {
  const auto capacity = static_cast<std::size_t>(state.range(0));
  agent::ReplayBuffer buffer(capacity);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < capacity; ++i) {
    const auto v = static_cast<graph::ViewerId>(rng() % 48);
    buffer.record_reward(v, u(rng), static_cast<int>(i / 64));
    agent::Transition t;
    t.viewer = v;
    buffer.push(std::move(t));
  }
  for (auto _ : state) benchmark::DoNotOptimize(buffer.sample_top_k(32));
}
BENCHMARK(BM_TopK)->Arg(64)->Arg(256)->Arg(1024);
