#include <benchmark/benchmark.h>

#include <random>

#include "losplan/los_engine.hpp"
#include "losplan/network_planner.hpp"
#include "losplan/placement.hpp"
#include "oracles.hpp"

namespace {

using namespace losplan;

Scene urban_scene(int n) {
  std::mt19937_64 rng(42);
  Scene s;
  s.dx = s.dy = 500;
  s.nx = s.ny = n;
  s.nux = s.nuy = 50;
  s.h_max = 200;
  s.blocks = testing::random_blocks(rng, 45, 500, 500, 10, 70);
  return s;
}

void BM_CoverageBatch(benchmark::State& state) {
  const LosEngine engine(urban_scene(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(engine.coverage({250, 250, 100}));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_CoverageBatch)->Arg(100)->Arg(250);

void BM_CoverageScalar(benchmark::State& state) {
  const LosEngine engine(urban_scene(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(engine.coverage_scalar({250, 250, 100}));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_CoverageScalar)->Arg(100)->Arg(250);

void BM_PlaneVisibility(benchmark::State& state) {
  const LosEngine engine(urban_scene(100));
  for (auto _ : state) benchmark::DoNotOptimize(engine.plane_visibility({120, 310, 0}, 100));
}
BENCHMARK(BM_PlaneVisibility);

void BM_CoverageObjective(benchmark::State& state) {
  const LosEngine engine(urban_scene(100));
  const CoverageObjective objective(engine, 100);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> cell(1, 50);
  for (auto _ : state) {
    const Layout layout{{cell(rng), cell(rng)}, {cell(rng), cell(rng)}, {cell(rng), cell(rng)}, {cell(rng), cell(rng)}};
    benchmark::DoNotOptimize(objective(layout));
  }
}
BENCHMARK(BM_CoverageObjective);

void BM_GeoKmeans(benchmark::State& state) {
  const Scene scene = urban_scene(100);
  const LosEngine engine(scene);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 500);
  GroundNodeSet nodes;
  while (nodes.size() < 25) {
    const Point3 p{u(rng), u(rng), 0};
    bool inside = false;
    for (const auto& b : scene.blocks) inside = inside || footprint_contains(b, p.x, p.y);
    if (!inside) nodes.positions.push_back(p);
  }
  LinkParams link;
  link.noise_power_w = dbm_to_watts(-85);
  const PlanContext ctx(engine, nodes, link, Atmosphere{}, 100, 1);
  for (auto _ : state) benchmark::DoNotOptimize(geo_kmeans_plan(ctx, 4, static_cast<int>(state.range(0)), 7));
}
BENCHMARK(BM_GeoKmeans)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
