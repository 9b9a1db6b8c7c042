#include <benchmark/benchmark.h>

#include "sola/analysis.hpp"
#include "sola/linreg.hpp"
#include "sola/mlp.hpp"
#include "sola/runner.hpp"

using namespace sola;

namespace {

Dataset random_regression_data(int samples, int dim, Rng& rng) {
  Dataset d;
  Eigen::VectorXd x_true = rng.gaussian_vec(dim);
  for (int i = 0; i < samples; ++i) {
    Sample s;
    s.features = rng.gaussian_vec(dim);
    s.target = Eigen::VectorXd::Constant(1, x_true.dot(s.features) + rng.gaussian());
    d.append(s);
  }
  return d;
}

}  // namespace

static void BM_GdStep(benchmark::State& state) {
  Rng rng(1);
  Dataset d = random_regression_data(1000, 10, rng);
  LinRegProblem prob(10);
  PerturbedGDModel model;
  model.eta = 0.05;
  Parameter x = rng.gaussian_vec(10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gd_step(model, x, d, prob));
  }
}
BENCHMARK(BM_GdStep);

static void BM_DsgdRound(benchmark::State& state) {
  Rng rng(2);
  LinRegProblem prob(10);
  SubUnitState units;
  units.params.assign(5, rng.gaussian_vec(10));
  units.shards.assign(5, Dataset());
  for (int s = 0; s < 5; ++s) units.shards[static_cast<std::size_t>(s)] =
      random_regression_data(200, 10, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dsgd_round(units, 0.05, prob));
  }
}
BENCHMARK(BM_DsgdRound);

static void BM_FedAvgRound(benchmark::State& state) {
  Rng rng(3);
  LinRegProblem prob(10);
  SubUnitState units;
  units.params.assign(5, rng.gaussian_vec(10));
  units.shards.assign(5, Dataset());
  for (int s = 0; s < 5; ++s) units.shards[static_cast<std::size_t>(s)] =
      random_regression_data(200, 10, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fedavg_round(units, 0.05, 3, prob));
  }
}
BENCHMARK(BM_FedAvgRound);

static void BM_MlpGrad(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  Rng rng(4);
  MlpProblem prob(784, 128, 10);
  Dataset d;
  for (int i = 0; i < batch; ++i) {
    Sample s;
    s.features = rng.gaussian_vec(784).cwiseAbs();
    s.target = Eigen::VectorXd::Constant(1, static_cast<double>(rng.index(10)));
    d.append(s);
  }
  Parameter x = prob.he_init(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(prob.grad(x, d));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_MlpGrad)->Arg(64)->Arg(256);

static void BM_EstimateBeta(benchmark::State& state) {
  auto quad = QuadraticProblem::diagonal(Eigen::Vector2d(2.0, 4.0));
  LocalAlgorithm gd;
  gd.model.eta = 0.1;
  DatasetSampler sampler = [](Rng&) {
    Dataset d;
    Sample s;
    s.features = Eigen::VectorXd::Zero(1);
    s.target = Eigen::VectorXd::Zero(1);
    d.append(s);
    return d;
  };
  for (auto _ : state) {
    Rng rng(5);
    benchmark::DoNotOptimize(estimate_beta(gd, quad, sampler, 64, rng));
  }
}
BENCHMARK(BM_EstimateBeta);

static void BM_Admissibility(benchmark::State& state) {
  Rng rng(6);
  SelectingSignal s;
  for (int k = 0; k < 200; ++k) s.sigma.push_back(1 + static_cast<int>(rng.index(3)));
  s.forced.assign(s.sigma.size(), 0);
  DwellParams p;
  p.n0 = 1.0;
  p.tau = 1.0;  // bound n0 + len never binds, so every window is scanned
  for (auto _ : state) {
    benchmark::DoNotOptimize(is_admissible(s, p));
  }
}
BENCHMARK(BM_Admissibility);

// a full fused run: two regression agents, fifty events
static void BM_RunFiftyEvents(benchmark::State& state) {
  LinRegStreamSpec spec;
  Rng init(derive_seed(0, SeedTag::init, 0));
  spec.x_true = init.gaussian_vec(3);
  spec.batch_size = 5;
  spec.noise_var = 3.0;
  std::vector<double> t1, t2;
  for (int i = 0; i < 25; ++i) {
    t1.push_back(2 * i + 1);
    t2.push_back(2 * i + 2);
  }
  Rng r1(derive_seed(0, SeedTag::data, 1));
  AgentStream s1 = gen_linreg_stream(spec, t1, r1);
  spec.noise_var = 30.0;
  Rng r2(derive_seed(0, SeedTag::data, 2));
  AgentStream s2 = gen_linreg_stream(spec, t2, r2);

  Scenario pristine;
  pristine.schedule = merge_schedules({{1, s1}, {2, s2}});
  LocalAlgorithm gd;
  gd.agent_id = 1;
  gd.model.eta = 0.05;
  LocalAlgorithm dsgd;
  dsgd.agent_id = 2;
  dsgd.kind = AlgorithmKind::DSGD;
  dsgd.model.eta = 0.05;
  dsgd.subunits.params.assign(5, Parameter());
  dsgd.subunits.shards.assign(5, Dataset());
  pristine.agents = {gd, dsgd};
  pristine.problem = std::make_shared<LinRegProblem>(3);
  pristine.signal = periodic_signal(pristine.schedule, 10, {1, 2});

  for (auto _ : state) {
    Scenario s = pristine;
    benchmark::DoNotOptimize(run(s));
  }
}
BENCHMARK(BM_RunFiftyEvents);

BENCHMARK_MAIN();
