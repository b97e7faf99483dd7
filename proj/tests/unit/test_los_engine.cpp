#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "losplan/los_engine.hpp"
#include "oracles.hpp"

using namespace losplan;
using losplan::testing::exact_blocked;

namespace {

Scene flat_scene(double dx, double dy, int n, int nu, double h_max, std::vector<PrismBlock> blocks = {}) {
  Scene s;
  s.dx = dx;
  s.dy = dy;
  s.nx = s.ny = n;
  s.nux = s.nuy = nu;
  s.h_max = h_max;
  s.blocks = std::move(blocks);
  return s;
}

}  // namespace

TEST_SUITE("los_engine") {
  TEST_CASE("hand-checked wall crossing") {
    const PrismBlock b = PrismBlock::cuboid(100, 0, 0, 120, 20, 20);
    CHECK(segment_blocked({0, 0, 100}, {200, 0, 0}, b));
    CHECK(segment_blocked({200, 0, 0}, {0, 0, 100}, b));
    CHECK_FALSE(segment_blocked({0, 50, 100}, {200, 50, 0}, b));
    CHECK_THROWS_AS(segment_blocked({1, 2, 3}, {1, 2, 3}, b), std::invalid_argument);
  }

  TEST_CASE("roof test catches segments that enter through the top") {
    const PrismBlock b = PrismBlock::cuboid(0, 0, 0, 10, 4, 4);
    // Lands inside the footprint at ground level: only the roof crossing is strictly inside.
    CHECK(segment_blocked({0.5, 0.5, 50}, {0.1, 0.1, 0}, b));
    // Grazing the roof plane exactly is LoS.
    CHECK_FALSE(segment_blocked({-10, 0, 10}, {10, 0, 10}, b));
  }

  TEST_CASE("empty scene sees everything") {
    const LosEngine engine(flat_scene(100, 100, 20, 10, 200));
    CHECK_FALSE(engine.blocked({0, 0, 0}, {50, 50, 80}));
    const CoverageGrid g = engine.coverage({50, 50, 80});
    CHECK(coverage_percent(g) == 100.0);
    CHECK(g.nlos().bits.count() == 0);
  }

  TEST_CASE("segment test agrees with the exact clipping oracle") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0, 300), z(0, 150);
    int checked = 0;
    for (int k = 0; k < 1000; ++k) {
      std::mt19937_64 brng(rng());
      const auto blocks = losplan::testing::random_blocks(brng, 1, 300, 300, 20, 120);
      const Point3 a{u(rng), u(rng), z(rng)}, b{u(rng), u(rng), z(rng)};
      const auto hs = losplan::testing::prism_halfspaces(blocks[0]);
      if (std::abs(losplan::testing::penetration_depth(hs, a, b)) < 1e-9 * 425.0) continue;
      ++checked;
      const bool got = segment_blocked(a, b, blocks[0]);
      CHECK(got == exact_blocked(blocks[0], a, b));
      CHECK(got == segment_blocked(b, a, blocks[0]));
    }
    CHECK(checked > 990);
  }

  TEST_CASE("batched coverage is bit-identical to per-cell tests") {
    std::mt19937_64 rng(7);
    for (int s = 0; s < 6; ++s) {
      Scene scene = flat_scene(300, 300, 60, 20, 200, losplan::testing::random_blocks(rng, 12, 300, 300, 10, 80));
      if (s % 2 == 1) {
        scene.ground_height.resize(60 * 60);
        for (int i = 0; i < 60; ++i) {
          for (int j = 0; j < 60; ++j) scene.ground_height[i * 60 + j] = 3.0 * std::sin(0.1 * i) * std::sin(0.13 * j);
        }
      }
      const LosEngine engine(scene);
      std::uniform_real_distribution<double> u(0, 300);
      for (double h : {60.0, 100.0, 150.0}) {
        Point3 uav{u(rng), u(rng), h};
        bool inside = false;
        for (const auto& b : scene.blocks) inside = inside || prism_contains(b, uav);
        if (inside) continue;
        const CoverageGrid fast = engine.coverage(uav);
        const CoverageGrid slow = engine.coverage_scalar(uav);
        CHECK(fast.bits == slow.bits);
        for (int i = 1; i <= scene.nx; i += 7) {
          for (int j = 1; j <= scene.ny; ++j) {
            bool blocked = false;
            for (const auto& b : scene.blocks) blocked = blocked || segment_blocked(uav, scene.cell_point(i, j), b);
            CHECK(fast.bits.get(i - 1, j - 1) == !blocked);
          }
        }
      }
    }
  }

  TEST_CASE("moving the UAV across a block changes the map") {
    const Scene scene = flat_scene(500, 500, 100, 20, 200, {PrismBlock::cuboid(250, 250, 0, 60, 40, 40)});
    const LosEngine engine(scene);
    const CoverageGrid west = engine.coverage({150, 250, 80});
    const CoverageGrid east = engine.coverage({350, 250, 80});
    CHECK_FALSE(west.bits == east.bits);
    // Shadow falls on the far side from the UAV.
    CHECK_FALSE(west.bits.get(55, 49));  // (280, 250)
    CHECK(west.bits.get(35, 49));  // (180, 250)
  }

  TEST_CASE("UAV validation") {
    const Scene scene = flat_scene(100, 100, 10, 10, 120, {PrismBlock::cuboid(50, 50, 0, 60, 20, 20)});
    const LosEngine engine(scene);
    try {
      engine.coverage({50, 50, 30});
      FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("endpoint occluded at source") != std::string::npos);
    }
    CHECK_THROWS_AS(engine.coverage({10, 10, 130}), std::invalid_argument);
    CHECK_THROWS_AS(engine.coverage({10, 10, 0}), std::invalid_argument);
  }

  TEST_CASE("los_vector matches the coverage grid") {
    std::mt19937_64 rng(9);
    const Scene scene = flat_scene(200, 200, 40, 10, 150, losplan::testing::random_blocks(rng, 8, 200, 200, 10, 60));
    const LosEngine engine(scene);
    std::vector<Point3> cells;
    for (int i = 1; i <= scene.nx; ++i) {
      for (int j = 1; j <= scene.ny; ++j) cells.push_back(scene.cell_point(i, j));
    }
    const Point3 uav{17, 133, 90};
    const LosVector v = engine.los_vector(cells, uav);
    const CoverageGrid g = engine.coverage(uav);
    REQUIRE(v.size() == cells.size());
    std::size_t k = 0;
    for (int i = 0; i < scene.nx; ++i) {
      for (int j = 0; j < scene.ny; ++j) CHECK(v[k++] == g.bits.get(i, j));
    }
    CHECK(los_vector(std::vector<Point3>{{10, 10, 0}}, {10, 10, 50}, flat_scene(100, 100, 5, 5, 100))[0]);
  }

  TEST_CASE("acceptable region") {
    SUBCASE("empty scene is all true") {
      const Scene scene = flat_scene(100, 100, 10, 10, 100);
      const std::vector<Point3> pts{{10, 10, 0}, {90, 90, 0}};
      CHECK(acceptable_region(pts, scene, 50).all());
    }
    SUBCASE("one node one block equals the per-cell oracle") {
      const Scene scene = flat_scene(100, 100, 10, 25, 100, {PrismBlock::cuboid(50, 50, 0, 40, 20, 20, 0.3)});
      const Point3 node{30, 45, 0};
      const BitMatrix region = acceptable_region(std::vector<Point3>{node}, scene, 60);
      std::size_t excluded = 0;
      for (int i = 1; i <= 25; ++i) {
        for (int j = 1; j <= 25; ++j) {
          const bool los = !exact_blocked(scene.blocks[0], node, scene.uav_cell_point(i, j, 60));
          CHECK(region.get(i - 1, j - 1) == los);
          excluded += los ? 0 : 1;
        }
      }
      CHECK(excluded > 0);
    }
    SUBCASE("nodes on both sides of a tall wall leave nothing") {
      const Scene scene = flat_scene(100, 100, 10, 25, 100, {PrismBlock::cuboid(50, 50, 0, 80, 20, 300)});
      const std::vector<Point3> pts{{39, 50, 0}, {61, 50, 0}};
      CHECK_FALSE(acceptable_region(pts, scene, 50).any());
      CHECK(acceptable_region(std::vector<Point3>{pts[0]}, scene, 50).any());
    }
    CHECK_THROWS_AS(acceptable_region(std::vector<Point3>{}, flat_scene(10, 10, 2, 2, 10), 5), std::invalid_argument);
  }

  TEST_CASE("union and percent") {
    BitMatrix checker(10, 10);
    for (int r = 0; r < 10; ++r) {
      for (int c = 0; c < 10; ++c) checker.set(r, c, (r + c) % 2 == 0);
    }
    const CoverageGrid g{checker, {}};
    CHECK(coverage_percent(g) == 50.0);
    const std::vector<CoverageGrid> both{g, g.nlos()};
    CHECK(coverage_percent(union_coverage(both)) == 100.0);
    CHECK(coverage_percent(CoverageGrid{BitMatrix(3, 3, false), {}}) == 0.0);
    const std::vector<CoverageGrid> bad{g, CoverageGrid{BitMatrix(3, 3), {}}};
    CHECK_THROWS_AS(union_coverage(bad), std::invalid_argument);
    CHECK_THROWS_AS(union_coverage(std::vector<CoverageGrid>{}), std::invalid_argument);
  }

  TEST_CASE("union is monotone") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0, 200);
    for (int s = 0; s < 20; ++s) {
      const Scene scene =
          flat_scene(200, 200, 30, 10, 150, losplan::testing::random_blocks(rng, 6, 200, 200, 20, 80));
      const LosEngine engine(scene);
      std::vector<CoverageGrid> grids;
      while (grids.size() < 3) {
        const Point3 p{u(rng), u(rng), 100};
        try {
          grids.push_back(engine.coverage(p));
        } catch (const std::invalid_argument&) {
        }
      }
      const CoverageGrid un = union_coverage(grids);
      for (const auto& g : grids) CHECK(un.bits.count() >= g.bits.count());
    }
  }

  TEST_CASE("high altitude shadow shrinks to the footprints") {
    const Scene scene = flat_scene(200, 200, 100, 10, 1e6,
                                   {PrismBlock::cuboid(60, 60, 0, 30, 20, 30, 0.4),
                                    PrismBlock::polygon(140, 130, 0, 25, 6, 15, 0.1)});
    const LosEngine engine(scene);
    const CoverageGrid g = engine.coverage({100, 100, 100 * 30.0});
    const BitMatrix mask = engine.footprint_mask();
    const std::size_t nlos = g.nlos().bits.count();
    CHECK(nlos >= mask.count());
    // One ring of cells around each footprint perimeter.
    const double ring = (2 * (20 + 30) + 6 * 15) / 2.0 + 16;
    CHECK(static_cast<double>(nlos - mask.count()) <= ring);
  }

  TEST_CASE("footprint exclusion") {
    const Scene scene = flat_scene(100, 100, 20, 5, 2e5, {PrismBlock::cuboid(52, 52, 0, 30, 20, 20)});
    const LosEngine engine(scene);
    const BitMatrix mask = engine.footprint_mask();
    CHECK(mask.count() == 16);  // cells at 45..60 on each axis
    const CoverageGrid g = engine.coverage({52, 52, 1e5});
    CHECK(coverage_percent(g, mask) == 100.0);
    CHECK(coverage_percent(g) < 100.0);
  }
}
