#include <benchmark/benchmark.h>

#include <vector>

#include "hygma/env/predator_prey.hpp"
#include "hygma/hypergraph/hypergraph.hpp"
#include "hygma/learn/learner.hpp"
#include "hygma/spectral/spectral.hpp"
#include "hygma/tensor/ops.hpp"

using namespace hygma;

static void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto a = Tensor::uniform({n, n}, -1, 1, rng);
  const auto b = Tensor::uniform({n, n}, -1, 1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(ops::matmul(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Matmul)->RangeMultiplier(2)->Range(16, 256)->Complexity();

static void BM_Eigh(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(n, n);
  const Eigen::MatrixXd m = 0.5 * (a + a.transpose());
  for (auto _ : state) benchmark::DoNotOptimize(spectral::eigh(m));
}
BENCHMARK(BM_Eigh)->DenseRange(4, 32, 4);

static void BM_Cluster(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<std::vector<double>> traj(n, std::vector<double>(100 * 29));
  for (std::size_t i = 0; i < n; ++i)
    for (auto& v : traj[i]) v = u(rng) + (i % 3 == 0 ? 2.0 : 0.0);
  spectral::SpectralConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(spectral::cluster(traj, cfg));
}
BENCHMARK(BM_Cluster)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_HgcnForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  spectral::Grouping g;
  g.k = 4;
  for (std::size_t i = 0; i < n; ++i) g.labels.push_back(i % g.k);
  g.cohesion = {0.5, 0.6, 0.7, 0.8};
  const auto hg = hypergraph::build_hypergraph(g);
  const auto net = hypergraph::HgcnNetwork::create(96, 64, 1, 1, rng);
  const auto x = Tensor::uniform({n, 96}, -1, 1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(hypergraph::forward(x, hg, net));
}
BENCHMARK(BM_HgcnForward)->Arg(5)->Arg(10)->Arg(20)->Arg(40);

static void BM_EnvStep(benchmark::State& state) {
  env::PPConfig cfg;
  Rng rng(4);
  std::uniform_int_distribution<int> act(0, env::kNumActions - 1);
  auto s = env::reset(cfg, rng).state;
  std::vector<int> a(cfg.n_predators);
  for (auto _ : state) {
    for (auto& x : a) x = act(rng);
    auto out = env::step(cfg, s, a, rng);
    benchmark::DoNotOptimize(env::observe(cfg, out.state));
    s = out.done ? env::reset(cfg, rng).state : out.state;
  }
}
BENCHMARK(BM_EnvStep);

// One learner update on a batch of random-policy episodes with default model sizes.
static void BM_Update(benchmark::State& state) {
  learn::TrainConfig cfg;
  cfg.learn.mode = state.range(0) == 0 ? learn::Mode::Value : learn::Mode::Policy;
  Rng rng(5);
  auto learner = learn::make_learner(cfg, rng);
  std::uniform_int_distribution<int> act(0, env::kNumActions - 1);

  spectral::Grouping g;
  g.k = 2;
  g.labels = {0, 0, 1, 1, 1};
  g.cohesion = {0.5, 0.5};
  g.version = 1;
  std::vector<learn::Episode> episodes(cfg.learn.mode == learn::Mode::Value ? 32 : 13);
  for (auto& ep : episodes) {
    ep.grouping = g;
    auto r = env::reset(cfg.env, rng);
    auto s = r.state;
    auto obs = r.observations;
    while (!s.done) {
      learn::Transition t;
      t.obs = obs;
      t.hidden.assign(cfg.env.n_predators, std::vector<double>(learner->hidden_dim(), 0.0));
      t.actions.resize(cfg.env.n_predators);
      for (auto& x : t.actions) x = act(rng);
      t.state = env::global_state(cfg.env, s);
      t.grouping_version = 1;
      const auto out = env::step(cfg.env, s, t.actions, rng);
      s = out.state;
      obs = env::observe(cfg.env, s);
      t.reward = out.reward;
      t.done = out.done;
      t.next_obs = obs;
      t.next_state = env::global_state(cfg.env, s);
      ep.total_reward += t.reward;
      ep.steps.push_back(std::move(t));
    }
  }
  std::vector<const learn::Episode*> batch;
  for (const auto& ep : episodes) batch.push_back(&ep);
  for (auto _ : state) benchmark::DoNotOptimize(learner->update(batch));
  state.SetLabel(cfg.learn.mode == learn::Mode::Value ? "value" : "policy");
}
BENCHMARK(BM_Update)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(3);

BENCHMARK_MAIN();
