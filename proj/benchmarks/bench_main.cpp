#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "klab/kostlan.hpp"
#include "klab/poly.hpp"
#include "klab/reference.hpp"
#include "klab/topology.hpp"

using namespace klab;

namespace {

std::vector<Vec3> unit_points(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = normalized(Vec3{g(rng), g(rng), g(rng)});
  return pts;
}

HomogeneousPoly poly_of_degree(int d) { return sample_kostlan(SamplerConfig{d, VarianceConvention::half, 3}, 0); }

void BM_EvaluatePointwise(benchmark::State& state) {
  const HomogeneousPoly p = poly_of_degree(static_cast<int>(state.range(0)));
  const auto pts = unit_points(1024);
  for (auto _ : state) {
    double acc = 0.0;
    for (const auto& x : pts) acc += evaluate_homogeneous(p, x);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size()));
}
BENCHMARK(BM_EvaluatePointwise)->Arg(20)->Arg(80)->Arg(300);

void BM_EvaluateBatch(benchmark::State& state) {
  const HomogeneousPoly p = poly_of_degree(static_cast<int>(state.range(0)));
  const auto pts = unit_points(1024);
  std::vector<double> out(pts.size());
  for (auto _ : state) {
    evaluate_homogeneous(p, pts, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size()));
}
BENCHMARK(BM_EvaluateBatch)->Arg(20)->Arg(80)->Arg(300);

void BM_SampleKostlan(benchmark::State& state) {
  const SamplerConfig cfg{static_cast<int>(state.range(0)), VarianceConvention::half, 9};
  std::uint64_t t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_kostlan(cfg, t++));
}
BENCHMARK(BM_SampleKostlan)->Arg(20)->Arg(100)->Arg(400);

void BM_RotatePoly(benchmark::State& state) {
  const HomogeneousPoly p = poly_of_degree(static_cast<int>(state.range(0)));
  const Rotation r = Rotation::about_axis({0.2, -0.5, 0.8}, 0.7);
  for (auto _ : state) benchmark::DoNotOptimize(rotate_poly(p, r));
}
BENCHMARK(BM_RotatePoly)->Arg(20)->Arg(50)->Arg(100);

void BM_AnnulusClass(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const Reference ref = build_p0(d, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(annulus_class(ref.poly, ref.annuli.front()));
}
BENCHMARK(BM_AnnulusClass)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
