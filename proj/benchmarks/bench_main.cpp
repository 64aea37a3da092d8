#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "noregret/attn_model.hpp"
#include "noregret/rng.hpp"
#include "noregret/theory.hpp"
#include "noregret/trainer.hpp"

using namespace noregret;

namespace {

Vec uniform_vec(std::size_t d, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 10.0);
  Vec v(static_cast<Eigen::Index>(d));
  for (auto& x : v) x = u(rng);
  return v;
}

std::vector<RewardVector> history(std::size_t d, int T, Rng& rng) {
  std::vector<RewardVector> h;
  for (int t = 0; t < T; ++t) h.push_back(uniform_vec(d, rng));
  return h;
}

void BM_Forward(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  Rng rng = make_rng(1);
  const ModelParams p = init_params(d, rng, 0.1);
  const auto h = history(d, 25, rng);
  const Operator op = Operator::softmax();
  for (auto _ : state) benchmark::DoNotOptimize(forward(h, p, op));
}
BENCHMARK(BM_Forward)->Arg(3)->Arg(10)->Arg(32);

void BM_Gradient(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  Rng rng = make_rng(2);
  const ModelParams p = init_params(d, rng, 0.1);
  std::vector<GradItem> batch;
  for (int i = 0; i < 1000; ++i) {
    const auto h = history(d, i % 25, rng);
    batch.push_back({PrefixStats::of(h, d), softmax(uniform_vec(d, rng))});
  }
  const Operator op = Operator::softmax();
  for (auto _ : state) benchmark::DoNotOptimize(gradient(p, batch, op));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Gradient)->Arg(3)->Arg(10);

void BM_Rollout(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  Rng rng = make_rng(3);
  const ModelParams p = init_params(3, rng, 0.1);
  const Scenario sc = make_scenario(EnvKind::kFOL, 3, T, PolicySpace::simplex(), ProcessKind::kGaussian, 4);
  Rng noise = make_rng(5), actions = make_rng(6);
  for (auto _ : state) benchmark::DoNotOptimize(rollout(sc, p, Operator::softmax(), 1.0, noise, actions));
}
BENCHMARK(BM_Rollout)->Arg(25)->Arg(100);

void BM_ExpectedNormMc(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(mc_expected_norm(3, 25, 1U << 16, 7));
}
BENCHMARK(BM_ExpectedNormMc);

}  // namespace

BENCHMARK_MAIN();
