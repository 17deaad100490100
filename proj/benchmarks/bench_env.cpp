#include <benchmark/benchmark.h>

#include "melanie/env/episode.hpp"
#include "melanie/graph/synthetic.hpp"

using namespace melanie;

static void BM_GenerativeEpisode(benchmark::State& state) {
  const graph::SyntheticEventConfig config;
  const graph::Task task = graph::split_task(graph::generate_synthetic_event(config, 7, "bench"), 0.8);
  const nn::ParameterSet params = nn::ParameterSet::initialize(nn::NetworkDims{}, 1);
  auto env = env::StreamingEnvironment::generative(task, config, 3, env::Phase::kQuery);
  std::size_t steps = 0;
  for (auto _ : state) {
    const auto ep = env::run_episode(env, params, 0.1, 5);
    steps += ep.transitions.size();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(steps));
}
BENCHMARK(BM_GenerativeEpisode)->Unit(benchmark::kMillisecond);

static void BM_SyntheticEvent(benchmark::State& state) {
  const graph::SyntheticEventConfig config;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(graph::generate_synthetic_event(config, ++seed).size());
}
BENCHMARK(BM_SyntheticEvent);
