#include "ddgda/bench.hpp"
#include "ddgda/distmap.hpp"
#include "ddgda/gradients.hpp"
#include "ddgda/metrics.hpp"
#include "ddgda/solvers.hpp"

#include <benchmark/benchmark.h>

using namespace ddgda;

static void BM_ProjectSimplex(benchmark::State &state) {
  const auto m = static_cast<Eigen::Index>(state.range(0));
  Rng rng(1);
  Vec v(m);
  for (Eigen::Index i = 0; i < m; ++i)
    v[i] = rng.normal();
  const auto set = ConstraintSet::simplex(m);
  for (auto _ : state)
    benchmark::DoNotOptimize(project(set, v));
}
BENCHMARK(BM_ProjectSimplex)->Arg(10)->Arg(40)->Arg(400);

static void BM_OlsUpdate(benchmark::State &state) {
  const auto p = make_election();
  const auto M = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const auto batch = sample(p.truth, p.init.x, p.init.y, M, rng);
  auto est = MapEstimate::zero(p.d, p.n, p.m);
  for (auto _ : state) {
    ols_update_inplace(est, p.init.x, p.init.y, batch);
    benchmark::DoNotOptimize(est.A_hat().data());
  }
}
BENCHMARK(BM_OlsUpdate)->Arg(1)->Arg(200);

static void BM_PluginMinibatch(benchmark::State &state) {
  const auto p = make_quadratic_sc();
  Rng rng(3);
  const auto batch = sample(p.truth, p.init.x, p.init.y, 200, rng);
  const auto J = jacobians(p.truth);
  Partials work;
  for (auto _ : state)
    benchmark::DoNotOptimize(minibatch_plugin(p.loss, J, p.init.x, p.init.y, batch, work));
}
BENCHMARK(BM_PluginMinibatch);

// Iterations per second of the full ASGDA loop without metric evaluation.
static void BM_AsgdaRun(benchmark::State &state) {
  const auto p = make_problem(state.range(0) == 0 ? "quadratic_sc" : "election");
  RunConfig cfg;
  cfg.T = 1000;
  cfg.M = 200;
  cfg.eta_x = 1e-4;
  cfg.eta_y = 1e-2;
  cfg.metrics = false;
  for (auto _ : state)
    benchmark::DoNotOptimize(run(p, cfg).records.size());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.T));
}
BENCHMARK(BM_AsgdaRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_InnerMaxPL(benchmark::State &state) {
  const auto p = make_pl_sine();
  const Vec x = Vec::Constant(1, 1.3);
  for (auto _ : state)
    benchmark::DoNotOptimize(inner_max(p, x).value);
}
BENCHMARK(BM_InnerMaxPL);
BENCHMARK_MAIN();
