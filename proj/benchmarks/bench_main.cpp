#include <benchmark/benchmark.h>

#include "scout/acquisition.hpp"
#include "scout/density.hpp"
#include "scout/dubins.hpp"
#include "scout/environment.hpp"
#include "scout/gp.hpp"

namespace {

using namespace scout;

KernelParams iso_params(int dim, double sf2, double ell, double sn2) {
  KernelParams p;
  p.signal_variance = sf2;
  p.lengthscales = Eigen::VectorXd::Constant(dim, ell);
  p.noise_variance = sn2;
  return p;
}

Dataset make_data(int n, int dim, Rng& rng) {
  Dataset d = Dataset::empty(dim);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(dim);
    for (int k = 0; k < dim; ++k) x[k] = rng.uniform();
    d.append(x, rng.normal());
  }
  return d;
}

void BM_GpConstruct(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  Dataset d = make_data(n, 3, rng);
  const KernelParams p = iso_params(3, 1.0, 0.25, 1e-2);
  for (auto _ : state) {
    GpModel m(p, d);
    benchmark::DoNotOptimize(m.log_marginal_likelihood());
  }
}
BENCHMARK(BM_GpConstruct)->Arg(50)->Arg(100)->Arg(226);

void BM_PosteriorMeanMany(benchmark::State& state) {
  Rng rng(2);
  Dataset d = make_data(226, 3, rng);
  GpModel m(iso_params(3, 1.0, 0.25, 1e-2), d);
  Eigen::MatrixXd X(static_cast<int>(state.range(0)), 3);
  for (int i = 0; i < X.rows(); ++i) X.row(i) << rng.uniform(), rng.uniform(), rng.uniform();
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.posterior_mean_many(X).sum());
  }
}
BENCHMARK(BM_PosteriorMeanMany)->Arg(10000)->Arg(100000);

void BM_FitWarm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(3);
  Environment env = make_benchmark("michalewicz");
  Dataset d = Dataset::empty(3);
  for (int i = 0; i < n; ++i) {
    const Vec2 z(rng.uniform(), rng.uniform());
    Eigen::VectorXd x(3);
    x << z[0], z[1], rng.uniform(0.0, 13.0);
    d.append(x, env(z, 0.0) + 0.01 * rng.normal());
  }
  FitOptions cold;
  cold.restarts = 4;
  KernelParams init = iso_params(3, 0.3, 0.2, 1e-3);
  init.lengthscales[2] = 4.0;
  GpModel m0 = fit(d, init, cold);
  FitOptions warm;
  warm.restarts = 1;
  warm.max_iters = 50;
  for (auto _ : state) {
    GpModel m = fit(d, m0.params(), warm);
    benchmark::DoNotOptimize(m.log_marginal_likelihood());
  }
}
BENCHMARK(BM_FitWarm)->Arg(100)->Arg(226);

void BM_Kde(benchmark::State& state) {
  Rng rng(4);
  Eigen::VectorXd ys(static_cast<int>(state.range(0)));
  for (int i = 0; i < ys.size(); ++i) ys[i] = rng.normal();
  for (auto _ : state) {
    OutputDensity d = OutputDensity::from_samples(ys);
    benchmark::DoNotOptimize(d.values.sum());
  }
}
BENCHMARK(BM_Kde)->Arg(10000)->Arg(100000);

void BM_Dubins(benchmark::State& state) {
  Rng rng(5);
  std::vector<std::pair<Pose, Pose>> pairs;
  for (int i = 0; i < 256; ++i) {
    pairs.emplace_back(Pose(Vec2(rng.uniform(), rng.uniform()), rng.uniform(-kPi, kPi)),
                       Pose(Vec2(rng.uniform(), rng.uniform()), rng.uniform(-kPi, kPi)));
  }
  size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ & 255];
    benchmark::DoNotOptimize(shortest_dubins(a, b, 0.02).length());
  }
}
BENCHMARK(BM_Dubins);

void BM_Acquisition(benchmark::State& state) {
  Rng rng(6);
  Dataset d = make_data(200, 3, rng);
  GpModel m(iso_params(3, 1.0, 0.25, 1e-2), d);
  const InputPrior prior = InputPrior::uniform();
  LikelihoodWeight lw = refresh_weight(m, prior, 0.5, WeightConfig{}, rng);
  AcquisitionContext ctx;
  ctx.model = &m;
  ctx.prior = &prior;
  ctx.weight = &lw;
  const auto kind = static_cast<AcquisitionKind>(state.range(0));
  AcquisitionEvaluator eval(kind, ctx);
  Eigen::VectorXd x(3);
  for (auto _ : state) {
    x << rng.uniform(), rng.uniform(), 0.5;
    benchmark::DoNotOptimize(eval.value(x));
  }
}
BENCHMARK(BM_Acquisition)
    ->Arg(static_cast<int>(AcquisitionKind::US))
    ->Arg(static_cast<int>(AcquisitionKind::USLW))
    ->Arg(static_cast<int>(AcquisitionKind::IVR))
    ->Arg(static_cast<int>(AcquisitionKind::IVRLW));

}  // namespace

BENCHMARK_MAIN();
