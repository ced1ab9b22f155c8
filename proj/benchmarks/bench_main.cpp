// Microbenchmarks for the hot paths: reflections, the two expensive fits, and
// a small end-to-end rate estimate.
#include <benchmark/benchmark.h>

#include "cleanlabel/attackers.hpp"
#include "cleanlabel/classes.hpp"
#include "cleanlabel/eval.hpp"
#include "cleanlabel/geometry.hpp"
#include "cleanlabel/learners.hpp"

namespace {

using namespace cleanlabel;

void BM_ReflectAxis(benchmark::State& state) {
  RngStream rng = RngStream::from_seed(7);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const UnitVector x = sample_sphere(n, rng);
  const UnitVector x0 = sample_sphere(n, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(reflect_axis(x, x0));
  }
}
BENCHMARK(BM_ReflectAxis)->Arg(3)->Arg(257);

void BM_ReflectSpanPlane(benchmark::State& state) {
  RngStream rng = RngStream::from_seed(7);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const UnitVector v1 = sample_sphere(n, rng);
  const Point x0 = sample_sphere(n, rng).coords();
  const Point x = sample_sphere(n, rng).coords();
  for (auto _ : state) {
    benchmark::DoNotOptimize(reflect_span_plane(x, x0, v1));
  }
}
BENCHMARK(BM_ReflectSpanPlane)->Arg(257);

void BM_FitLinear2d(benchmark::State& state) {
  RngStream rng = RngStream::from_seed(11);
  const TargetedDistribution dist =
      make_margin_disk_experiment(2, 0.25, rng).dist;
  RngStream sample_rng = rng.derive("sample");
  const Dataset sample =
      dist.sample_dataset(static_cast<std::size_t>(state.range(0)), sample_rng);
  const Learner learner = make_linear2d_learner();
  for (auto _ : state) {
    RngStream fit_rng = rng.derive("fit");
    benchmark::DoNotOptimize(learner.fit(sample, fit_rng));
  }
}
BENCHMARK(BM_FitLinear2d)->Arg(1000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_FitSvm(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  RngStream rng = RngStream::from_seed(13);
  const TargetedDistribution dist = make_halfsphere_experiment(n, 0.01);
  RngStream sample_rng = rng.derive("sample");
  const Dataset sample = dist.sample_dataset(100, sample_rng);
  const Learner learner = make_svm_learner();
  for (auto _ : state) {
    RngStream fit_rng = rng.derive("fit");
    benchmark::DoNotOptimize(learner.fit(sample, fit_rng));
  }
}
BENCHMARK(BM_FitSvm)->Arg(128)->Arg(1280)->Unit(benchmark::kMillisecond);

void BM_AttackableRate(benchmark::State& state) {
  const TargetedDistribution dist = make_interval_experiment(
      IntervalHypothesis::empty(), PiecewiseDensity::uniform());
  const Learner learner = make_max_interval_learner();
  const std::vector<Attacker> pool{make_interval_flood_attacker()};
  const RngStream base = RngStream::from_seed(17);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        attackable_rate(learner, pool, dist, 30, 20, 20, base));
  }
}
BENCHMARK(BM_AttackableRate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
