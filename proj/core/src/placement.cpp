#include "losplan/placement.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "losplan/parallel.hpp"

namespace losplan {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool budget_spent(const SearchOptions& options, std::uint64_t evals) {
  return options.max_evals != 0 && evals >= options.max_evals;
}

void record(const SearchOptions& options, std::uint64_t evals, double best) {
  if (options.monitor != nullptr) options.monitor->record(evals, best);
}

UavCell random_cell(const UavPlane& plane, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> di(1, plane.nux);
  std::uniform_int_distribution<int> dj(1, plane.nuy);
  const int i = di(rng);
  return {i, dj(rng)};
}

Layout random_layout(const UavPlane& plane, int n_uav, std::mt19937_64& rng) {
  Layout layout(static_cast<std::size_t>(n_uav));
  for (UavCell& c : layout) c = random_cell(plane, rng);
  return layout;
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

PlacementState finish(PlacementState state, const UavPlane& plane) {
  state.positions = plane.points(state.cells);
  return state;
}

void check_search_args(const UavPlane& plane, int n_uav) {
  if (n_uav < 1) throw std::invalid_argument("placement: need at least one UAV");
  if (plane.nux < 1 || plane.nuy < 1) throw std::invalid_argument("placement: empty candidate plane");
}

struct Population {
  std::vector<Layout> columns;
  std::vector<double> fitness;
};

void evaluate_population(Population& pop, const ObjectiveFn& objective, int threads) {
  pop.fitness.assign(pop.columns.size(), kNegInf);
  std::vector<Evaluation> results(pop.columns.size());
  parallel_for(pop.columns.size(), threads, [&](std::size_t k) { results[k] = objective(pop.columns[k]); });
  for (std::size_t k = 0; k < results.size(); ++k) {
    pop.fitness[k] = results[k].value;
    if (results[k].repaired) pop.columns[k] = std::move(*results[k].repaired);
  }
}

class Evolution {
 public:
  Evolution(const GaConfig& config, const UavPlane& plane, int n_uav)
      : config_(config), plane_(plane), n_uav_(n_uav), rng_(config.rng_seed) {}

  Layout initial_column() { return random_layout(plane_, n_uav_, rng_); }

  /// Sorted order (best first, ties to lower index) of the evaluated population.
  static std::vector<std::size_t> ranking(const std::vector<double>& fitness) {
    std::vector<std::size_t> order(fitness.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });
    return order;
  }

  std::vector<Layout> next_generation(const Population& pop, const std::vector<std::size_t>& order) {
    std::vector<double> weights = roulette_weights(pop.fitness);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<int> slot(0, n_uav_ - 1);

    std::vector<Layout> next;
    next.reserve(pop.columns.size());
    for (int e = 0; e < config_.elite; ++e) next.push_back(pop.columns[order[static_cast<std::size_t>(e)]]);
    for (int c = 0; c < config_.crossover; ++c) {
      const Layout& a = pop.columns[pick(rng_)];
      const Layout& b = pop.columns[pick(rng_)];
      Layout child(static_cast<std::size_t>(n_uav_));
      for (std::size_t n = 0; n < child.size(); ++n) child[n] = coin(rng_) ? a[n] : b[n];
      next.push_back(std::move(child));
    }
    for (int m = 0; m < config_.mutation; ++m) {
      Layout child = pop.columns[pick(rng_)];
      UavCell& target = child[static_cast<std::size_t>(slot(rng_))];
      target = mutate(target);
      next.push_back(std::move(child));
    }
    return next;
  }

 private:
  static std::vector<double> roulette_weights(const std::vector<double>& fitness) {
    double lo = std::numeric_limits<double>::infinity();
    for (double f : fitness) {
      if (std::isfinite(f)) lo = std::min(lo, f);
    }
    std::vector<double> w(fitness.size());
    for (std::size_t k = 0; k < fitness.size(); ++k) {
      w[k] = std::isfinite(fitness[k]) ? fitness[k] - lo + 1e-6 : 0.0;
    }
    if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) std::fill(w.begin(), w.end(), 1.0);
    return w;
  }

  UavCell mutate(const UavCell& cell) {
    if (config_.mutation_sigma_cells <= 0.0) return random_cell(plane_, rng_);
    std::normal_distribution<double> step(0.0, config_.mutation_sigma_cells);
    const int i = std::clamp(cell.i + static_cast<int>(std::lround(step(rng_))), 1, plane_.nux);
    const int j = std::clamp(cell.j + static_cast<int>(std::lround(step(rng_))), 1, plane_.nuy);
    return {i, j};
  }

  const GaConfig& config_;
  const UavPlane& plane_;
  int n_uav_;
  std::mt19937_64 rng_;
};

PlacementState evolve(const GaConfig& config, const ObjectiveFn& objective, const UavPlane& plane, int n_uav,
                      const SearchOptions& options, bool hybrid) {
  config.validate();
  check_search_args(plane, n_uav);
  Evolution evo(config, plane, n_uav);
  std::mt19937_64 greedy_rng(derived_seed(config.rng_seed, 0x9e3779b97f4a7c15ull));
  const int threads = resolve_thread_count(options.threads);

  Population pop;
  pop.columns.reserve(static_cast<std::size_t>(config.population));
  for (int k = 0; k < config.population; ++k) pop.columns.push_back(evo.initial_column());

  PlacementState best;
  std::uint64_t evals = 0;
  const auto improve = [&](const Layout& cells, double value) {
    if (value > best.objective || best.cells.empty()) {
      best.cells = cells;
      best.objective = value;
    }
  };
  for (int gen = 0; gen < config.iterations; ++gen) {
    if (budget_spent(options, evals)) break;
    evaluate_population(pop, objective, threads);
    evals += static_cast<std::uint64_t>(config.population);
    std::vector<std::size_t> order = Evolution::ranking(pop.fitness);
    improve(pop.columns[order[0]], pop.fitness[order[0]]);

    if (hybrid && config.greedy_descents > 0) {
      // Refine distinct columns drawn from the greedy_pool best; results replace them in place.
      std::vector<std::size_t> pool(order.begin(), order.begin() + config.greedy_pool);
      std::shuffle(pool.begin(), pool.end(), greedy_rng);
      for (int g = 0; g < config.greedy_descents; ++g) {
        if (budget_spent(options, evals)) break;
        const std::size_t col = pool[static_cast<std::size_t>(g)];
        PlacementState start;
        start.cells = pop.columns[col];
        start.eval_count = evals;
        PlacementState local = greedy_descend(start, objective, plane, options);
        evals = local.eval_count;
        pop.columns[col] = local.cells;
        pop.fitness[col] = local.objective;
        improve(local.cells, local.objective);
      }
      order = Evolution::ranking(pop.fitness);
    }
    record(options, evals, best.objective);
    if (gen + 1 == config.iterations) break;
    pop.columns = evo.next_generation(pop, order);
  }
  best.eval_count = evals;
  return finish(std::move(best), plane);
}

}  // namespace

UavPlane UavPlane::from_scene(const Scene& scene, double h_u) {
  if (!std::isfinite(h_u) || h_u > scene.h_max) {
    throw std::invalid_argument("placement: altitude " + std::to_string(h_u) + " exceeds h_max");
  }
  if (scene.nux < 1 || scene.nuy < 1) throw std::invalid_argument("placement: empty candidate plane");
  return {scene.nux, scene.nuy, scene.uav_cell_dx(), scene.uav_cell_dy(), h_u};
}

std::vector<Point3> UavPlane::points(std::span<const UavCell> layout) const {
  std::vector<Point3> out;
  out.reserve(layout.size());
  for (const UavCell& c : layout) out.push_back(point(c));
  return out;
}

UavCell UavPlane::nearest(double x, double y) const {
  const int i = std::clamp(static_cast<int>(std::lround(x / step_x)), 1, nux);
  const int j = std::clamp(static_cast<int>(std::lround(y / step_y)), 1, nuy);
  return {i, j};
}

SearchMonitor::SearchMonitor(Callback on_point) : start_(std::chrono::steady_clock::now()), on_point_(std::move(on_point)) {}

void SearchMonitor::record(std::uint64_t eval_count, double best_objective) {
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
  trace_.push_back({dt.count(), eval_count, best_objective});
  if (on_point_) on_point_(trace_.back());
}

std::vector<GreedyAction> greedy_actions(int n_uav, double step_x, double step_y) {
  std::vector<GreedyAction> actions;
  actions.reserve(static_cast<std::size_t>(5 * std::max(0, n_uav)));
  for (int u = 0; u < n_uav; ++u) {
    actions.push_back({u, 0, 0, 0.0, 0.0});
    actions.push_back({u, 1, 0, step_x, 0.0});
    actions.push_back({u, -1, 0, -step_x, 0.0});
    actions.push_back({u, 0, 1, 0.0, step_y});
    actions.push_back({u, 0, -1, 0.0, -step_y});
  }
  return actions;
}

void GaConfig::validate() const {
  if (population < 1) throw std::invalid_argument("ga: population must be positive");
  if (elite < 1 || crossover < 0 || mutation < 0) throw std::invalid_argument("ga: bad operator counts");
  if (elite + crossover + mutation != population) {
    throw std::invalid_argument("ga: elite + crossover + mutation must equal population");
  }
  if (iterations < 1) throw std::invalid_argument("ga: iterations must be positive");
  if (greedy_pool < elite || greedy_pool > population) {
    throw std::invalid_argument("ga: greedy pool must lie in [elite, population]");
  }
  if (greedy_descents < 0 || greedy_descents > greedy_pool) {
    throw std::invalid_argument("ga: greedy descents must lie in [0, greedy pool]");
  }
  if (mutation_sigma_cells < 0.0 || !std::isfinite(mutation_sigma_cells)) {
    throw std::invalid_argument("ga: mutation sigma must be finite and non-negative");
  }
}

PlacementState greedy_descend(const PlacementState& start, const ObjectiveFn& objective, const UavPlane& plane,
                              const SearchOptions& options) {
  check_search_args(plane, static_cast<int>(start.cells.size()));
  for (const UavCell& c : start.cells) {
    if (!plane.contains(c)) throw std::invalid_argument("greedy: start layout outside the candidate plane");
  }
  const int n_uav = static_cast<int>(start.cells.size());
  const std::vector<GreedyAction> actions = greedy_actions(n_uav, plane.step_x, plane.step_y);
  const int threads = resolve_thread_count(options.threads);

  PlacementState state = start;
  std::vector<Evaluation> results(actions.size());
  std::vector<Layout> moved(actions.size());
  for (std::uint64_t step = 0; step < options.max_greedy_steps; ++step) {
    if (budget_spent(options, state.eval_count)) break;
    for (std::size_t k = 0; k < actions.size(); ++k) {
      moved[k] = state.cells;
      UavCell& c = moved[k][static_cast<std::size_t>(actions[k].uav)];
      c.i += actions[k].di;
      c.j += actions[k].dj;
    }
    // Every stay action leaves the layout unchanged, so it is evaluated once.
    Evaluation stay;
    std::vector<std::size_t> work;
    work.reserve(actions.size());
    for (std::size_t k = 0; k < actions.size(); ++k) {
      if (!actions[k].is_stay() && plane.contains(moved[k][static_cast<std::size_t>(actions[k].uav)])) {
        work.push_back(k);
      }
    }
    work.push_back(actions.size());
    parallel_for(work.size(), threads, [&](std::size_t w) {
      const std::size_t k = work[w];
      if (k == actions.size()) {
        stay = objective(state.cells);
      } else {
        results[k] = objective(moved[k]);
      }
    });
    for (std::size_t k = 0; k < actions.size(); ++k) {
      if (actions[k].is_stay()) {
        results[k] = stay;
      } else if (!plane.contains(moved[k][static_cast<std::size_t>(actions[k].uav)])) {
        results[k] = Evaluation{};
      }
    }
    state.eval_count += actions.size();

    std::size_t best = 0;
    for (std::size_t k = 1; k < results.size(); ++k) {
      if (results[k].value > results[best].value) best = k;
    }
    state.objective = results[best].value;
    const bool done = actions[best].is_stay();
    state.cells = results[best].repaired ? *results[best].repaired : moved[best];
    record(options, state.eval_count, state.objective);
    if (done) break;
  }
  return finish(std::move(state), plane);
}

PlacementState greedy_multistart(const ObjectiveFn& objective, const UavPlane& plane, int n_uav, int n_starts,
                                 std::uint64_t rng_seed, const SearchOptions& options) {
  check_search_args(plane, n_uav);
  if (n_starts < 1) throw std::invalid_argument("greedy: need at least one start");
  std::mt19937_64 rng(rng_seed);
  PlacementState best;
  std::uint64_t evals = 0;
  for (int s = 0; s < n_starts; ++s) {
    if (budget_spent(options, evals)) break;
    PlacementState start;
    start.cells = random_layout(plane, n_uav, rng);
    start.eval_count = evals;
    PlacementState local = greedy_descend(start, objective, plane, options);
    evals = local.eval_count;
    if (local.objective > best.objective || best.cells.empty()) best = std::move(local);
  }
  best.eval_count = evals;
  return finish(std::move(best), plane);
}

PlacementState ga_search(const GaConfig& config, const ObjectiveFn& objective, const UavPlane& plane, int n_uav,
                         const SearchOptions& options) {
  return evolve(config, objective, plane, n_uav, options, false);
}

PlacementState hybrid_search(const GaConfig& config, const ObjectiveFn& objective, const UavPlane& plane,
                             int n_uav, const SearchOptions& options) {
  return evolve(config, objective, plane, n_uav, options, true);
}

CoverageObjective::CoverageObjective(const LosEngine& engine, double h_u, bool exclude_footprint_cells,
                                     std::size_t cache_capacity)
    : engine_(&engine),
      plane_(UavPlane::from_scene(engine.scene(), h_u)),
      exclude_footprint_(exclude_footprint_cells),
      capacity_(std::max<std::size_t>(1, cache_capacity)) {
  if (exclude_footprint_) footprint_ = engine.footprint_mask();
}

std::shared_ptr<const BitMatrix> CoverageObjective::cell_grid(const UavCell& cell) const {
  const std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cell.i)) << 32) |
                            static_cast<std::uint32_t>(cell.j);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  // Cells occluded at the source (inside a block) are cached as null.
  std::shared_ptr<const BitMatrix> grid;
  try {
    grid = std::make_shared<const BitMatrix>(engine_->coverage(plane_.point(cell)).bits);
  } catch (const std::invalid_argument&) {
    grid = nullptr;
  }
  std::lock_guard lock(mutex_);
  if (cache_.size() >= capacity_) cache_.clear();
  return cache_.emplace(key, std::move(grid)).first->second;
}

CoverageGrid CoverageObjective::grid(std::span<const UavCell> layout) const {
  if (layout.empty()) throw std::invalid_argument("coverage objective: empty layout");
  CoverageGrid out;
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const auto g = cell_grid(layout[k]);
    if (!g) throw std::invalid_argument("coverage objective: UAV cell lies inside a block");
    if (k == 0) {
      out.bits = *g;
    } else {
      out.bits |= *g;
    }
  }
  out.sources = plane_.points(layout);
  return out;
}

double CoverageObjective::percent(const CoverageGrid& g) const {
  return exclude_footprint_ ? coverage_percent(g, footprint_) : coverage_percent(g);
}

Evaluation CoverageObjective::operator()(std::span<const UavCell> layout) const {
  for (const UavCell& c : layout) {
    if (!plane_.contains(c) || !cell_grid(c)) return {};
  }
  return {percent(grid(layout)), std::nullopt};
}

ObjectiveFn CoverageObjective::as_function() const {
  return [this](std::span<const UavCell> layout) { return (*this)(layout); };
}

}  // namespace losplan
