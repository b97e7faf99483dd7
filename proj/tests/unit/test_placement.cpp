#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

#include "doctest.h"
#include "losplan/placement.hpp"

using namespace losplan;

namespace {

Scene make_scene(double d, int n, int nu, std::vector<PrismBlock> blocks) {
  Scene s;
  s.dx = s.dy = d;
  s.nx = s.ny = n;
  s.nux = s.nuy = nu;
  s.h_max = 200;
  s.blocks = std::move(blocks);
  return s;
}

// Two tall blocks far apart: each casts a long shadow, giving separate basins.
Scene two_block_scene() {
  return make_scene(200, 40, 20, {PrismBlock::cuboid(55, 60, 0, 70, 24, 30, 0.3),
                                  PrismBlock::polygon(145, 135, 0, 90, 6, 15, 0.1)});
}

// Concave bowl with its peak at (7, 4) for every UAV.
Evaluation bowl(std::span<const UavCell> layout) {
  double v = 0;
  for (const UavCell& c : layout) v -= (c.i - 7) * (c.i - 7) + (c.j - 4) * (c.j - 4);
  return {v, std::nullopt};
}

double exhaustive_best(const CoverageObjective& obj) {
  const UavPlane& p = obj.plane();
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 1; i <= p.nux; ++i) {
    for (int j = 1; j <= p.nuy; ++j) {
      const UavCell c{i, j};
      best = std::max(best, obj(std::span<const UavCell>(&c, 1)).value);
    }
  }
  return best;
}

bool improvable(const PlacementState& s, const ObjectiveFn& f, const UavPlane& plane) {
  for (std::size_t u = 0; u < s.cells.size(); ++u) {
    for (const auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      Layout m = s.cells;
      m[u].i += di;
      m[u].j += dj;
      if (!plane.contains(m[u])) continue;
      if (f(m).value > s.objective) return true;
    }
  }
  return false;
}

GaConfig small_ga(std::uint64_t seed) {
  GaConfig c;
  c.population = 12;
  c.elite = 2;
  c.crossover = 6;
  c.mutation = 4;
  c.iterations = 8;
  c.greedy_pool = 4;
  c.greedy_descents = 2;
  c.rng_seed = seed;
  return c;
}

}  // namespace

TEST_SUITE("placement") {
  TEST_CASE("action set") {
    const auto a = greedy_actions(3, 10, 20);
    REQUIRE(a.size() == 15);
    for (int u = 0; u < 3; ++u) {
      const auto* g = &a[static_cast<std::size_t>(5 * u)];
      CHECK(g[0].is_stay());
      CHECK((g[1].di == 1 && g[1].dx == 10));
      CHECK((g[2].di == -1 && g[2].dx == -10));
      CHECK((g[3].dj == 1 && g[3].dy == 20));
      CHECK((g[4].dj == -1 && g[4].dy == -20));
      for (int k = 0; k < 5; ++k) {
        CHECK(g[k].uav == u);
        CHECK(std::abs(g[k].di) + std::abs(g[k].dj) <= 1);
      }
    }
  }

  TEST_CASE("plane geometry") {
    const Scene s = make_scene(200, 40, 20, {});
    const UavPlane p = UavPlane::from_scene(s, 80);
    CHECK(p.point({1, 1}) == Point3{10, 10, 80});
    CHECK(p.point({20, 20}) == Point3{200, 200, 80});
    CHECK(p.nearest(-50, 1000) == UavCell{1, 20});
    CHECK(p.nearest(34, 46) == UavCell{3, 5});
    CHECK_THROWS_AS(UavPlane::from_scene(s, 250), std::invalid_argument);
  }

  TEST_CASE("greedy on an empty scene stops after one sweep") {
    const LosEngine engine(make_scene(100, 10, 10, {}));
    const CoverageObjective obj(engine, 50);
    PlacementState start;
    start.cells = {{3, 3}, {8, 2}};
    const PlacementState out = greedy_descend(start, obj.as_function(), obj.plane());
    CHECK(out.cells == start.cells);
    CHECK(out.eval_count == 10);
    CHECK(out.objective == 100.0);
  }

  TEST_CASE("greedy climbs a bowl and counts 5 N_u per sweep") {
    const UavPlane plane{10, 10, 1, 1, 5};
    SearchMonitor mon;
    SearchOptions opt;
    opt.monitor = &mon;
    PlacementState start;
    start.cells = {{1, 1}, {10, 10}};
    const PlacementState out = greedy_descend(start, bowl, plane, opt);
    CHECK(out.cells == Layout{{7, 4}, {7, 4}});
    // L1 distance 9 + 9 moves, then a final sweep that picks stay.
    CHECK(mon.trace().size() == 19);
    CHECK(out.eval_count == 10 * mon.trace().size());
    CHECK(out.positions.size() == 2);
    CHECK(out.positions[0] == Point3{7, 4, 5});
  }

  TEST_CASE("greedy output admits no improving single move") {
    const LosEngine engine(make_scene(200, 40, 20, {PrismBlock::cuboid(100, 100, 0, 60, 30, 30, 0.2)}));
    const CoverageObjective obj(engine, 50);
    const ObjectiveFn f = obj.as_function();
    for (const Layout& s : {Layout{{1, 1}}, Layout{{10, 12}}, Layout{{20, 3}}, Layout{{4, 18}, {15, 9}}}) {
      PlacementState start;
      start.cells = s;
      start.objective = f(s).value;
      SearchMonitor mon;
      SearchOptions opt;
      opt.monitor = &mon;
      const PlacementState out = greedy_descend(start, f, obj.plane(), opt);
      CHECK(out.objective >= start.objective);
      CHECK(out.objective == f(out.cells).value);
      CHECK_FALSE(improvable(out, f, obj.plane()));
      CHECK(out.eval_count == 5 * s.size() * mon.trace().size());
    }
  }

  TEST_CASE("multistart finds the lattice optimum") {
    const LosEngine engine(two_block_scene());
    const CoverageObjective obj(engine, 40);
    const double best = exhaustive_best(obj);
    const PlacementState out = greedy_multistart(obj.as_function(), obj.plane(), 1, 50, 17);
    CHECK(out.objective == best);
    const PlacementState one = greedy_multistart(obj.as_function(), obj.plane(), 1, 1, 17);
    CHECK(one.objective <= out.objective);
    double prev = -1;
    for (int n : {1, 3, 10, 30}) {
      const double v = greedy_multistart(obj.as_function(), obj.plane(), 1, n, 17).objective;
      CHECK(v >= prev);
      prev = v;
    }
  }

  TEST_CASE("ga config validation") {
    GaConfig c;
    CHECK_NOTHROW(c.validate());
    c.mutation = 11;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = GaConfig{};
    c.greedy_pool = 3;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = GaConfig{};
    c.greedy_descents = 9;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }

  TEST_CASE("elite-only population never changes") {
    GaConfig c;
    c.population = c.elite = c.greedy_pool = 6;
    c.crossover = c.mutation = 0;
    c.greedy_descents = 0;
    c.iterations = 5;
    std::mutex m;
    std::vector<Layout> gen;
    const ObjectiveFn f = [&](std::span<const UavCell> l) {
      std::lock_guard lock(m);
      gen.emplace_back(l.begin(), l.end());
      return bowl(l);
    };
    const PlacementState out = ga_search(c, f, UavPlane{10, 10, 1, 1, 5}, 2);
    REQUIRE(gen.size() == 30);
    std::vector<Layout> first(gen.begin(), gen.begin() + 6);
    std::sort(first.begin(), first.end());
    for (int g = 1; g < 5; ++g) {
      std::vector<Layout> cur(gen.begin() + 6 * g, gen.begin() + 6 * (g + 1));
      std::sort(cur.begin(), cur.end());
      CHECK(cur == first);
    }
    CHECK(out.eval_count == 30);
  }

  TEST_CASE("ga budget and elitism") {
    const LosEngine engine(two_block_scene());
    const CoverageObjective obj(engine, 40);
    SearchMonitor mon;
    SearchOptions opt;
    opt.monitor = &mon;
    const GaConfig c = small_ga(5);
    const PlacementState out = ga_search(c, obj.as_function(), obj.plane(), 2, opt);
    CHECK(out.eval_count == 12 * 8);
    REQUIRE(mon.trace().size() == 8);
    for (std::size_t k = 1; k < mon.trace().size(); ++k) {
      CHECK(mon.trace()[k].best_objective >= mon.trace()[k - 1].best_objective);
      CHECK(mon.trace()[k].eval_count == 12 * (k + 1));
    }
    CHECK(out.objective == mon.trace().back().best_objective);
    CHECK(out.objective == obj(out.cells).value);
    for (const Point3& p : out.positions) CHECK(p.z == 40);
  }

  TEST_CASE("hybrid without descents replays the ga") {
    const LosEngine engine(two_block_scene());
    const CoverageObjective obj(engine, 40);
    GaConfig c = small_ga(9);
    c.greedy_descents = 0;
    SearchMonitor m1, m2;
    SearchOptions o1, o2;
    o1.monitor = &m1;
    o2.monitor = &m2;
    const PlacementState a = ga_search(c, obj.as_function(), obj.plane(), 2, o1);
    const PlacementState b = hybrid_search(c, obj.as_function(), obj.plane(), 2, o2);
    CHECK(a.cells == b.cells);
    CHECK(a.objective == b.objective);
    CHECK(a.eval_count == b.eval_count);
    REQUIRE(m1.trace().size() == m2.trace().size());
    for (std::size_t k = 0; k < m1.trace().size(); ++k) {
      CHECK(m1.trace()[k].best_objective == m2.trace()[k].best_objective);
    }
  }

  TEST_CASE("hybrid budget, elitism and paired-seed comparison") {
    const LosEngine engine(two_block_scene());
    const CoverageObjective obj(engine, 40);
    for (std::uint64_t seed : {1, 2, 3, 4}) {
      CAPTURE(seed);
      const GaConfig c = small_ga(seed);
      SearchMonitor mon;
      SearchOptions opt;
      opt.monitor = &mon;
      const PlacementState h = hybrid_search(c, obj.as_function(), obj.plane(), 2, opt);
      const PlacementState g = ga_search(c, obj.as_function(), obj.plane(), 2);
      CHECK(h.objective >= g.objective);
      const std::uint64_t extra = h.eval_count - 12 * 8;
      CHECK(h.eval_count > 12 * 8);
      CHECK(extra % 10 == 0);
      for (std::size_t k = 1; k < mon.trace().size(); ++k) {
        CHECK(mon.trace()[k].eval_count >= mon.trace()[k - 1].eval_count);
      }
    }
  }

  TEST_CASE("determinism and thread invariance") {
    const LosEngine engine(two_block_scene());
    const CoverageObjective obj(engine, 40);
    const GaConfig c = small_ga(21);
    SearchOptions one, many;
    many.threads = 4;
    const PlacementState a = hybrid_search(c, obj.as_function(), obj.plane(), 3, one);
    const PlacementState b = hybrid_search(c, obj.as_function(), obj.plane(), 3, one);
    const PlacementState d = hybrid_search(c, obj.as_function(), obj.plane(), 3, many);
    CHECK(a.cells == b.cells);
    CHECK(a.cells == d.cells);
    CHECK(a.objective == d.objective);
    CHECK(a.eval_count == d.eval_count);
    const PlacementState g1 = greedy_multistart(obj.as_function(), obj.plane(), 2, 4, 3, one);
    const PlacementState g2 = greedy_multistart(obj.as_function(), obj.plane(), 2, 4, 3, many);
    CHECK(g1.cells == g2.cells);
  }

  TEST_CASE("evaluation cap stops new sweeps and generations") {
    const UavPlane plane{10, 10, 1, 1, 5};
    SearchOptions opt;
    opt.max_evals = 25;
    PlacementState start;
    start.cells = {{1, 1}, {10, 10}};
    CHECK(greedy_descend(start, bowl, plane, opt).eval_count == 30);
    GaConfig c = small_ga(1);
    opt.max_evals = 30;
    CHECK(ga_search(c, bowl, plane, 2, opt).eval_count == 36);
  }

  TEST_CASE("coverage objective") {
    const Scene s = make_scene(100, 20, 10, {PrismBlock::cuboid(50, 50, 0, 60, 20, 20)});
    const LosEngine engine(s);
    const CoverageObjective obj(engine, 40);
    const Layout inside{{5, 5}};
    CHECK(obj(inside).value == -std::numeric_limits<double>::infinity());
    const Layout l{{2, 2}, {9, 9}};
    const std::vector<CoverageGrid> grids{engine.coverage(obj.plane().point(l[0])),
                                          engine.coverage(obj.plane().point(l[1]))};
    CHECK(obj(l).value == coverage_percent(union_coverage(grids)));
    CHECK(obj(l).value == obj(l).value);
    const CoverageObjective tiny(engine, 40, false, 1);
    CHECK(tiny(l).value == obj(l).value);
  }
}
