#include "roadcover/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_set>

#include "roadcover/parallel.hpp"

namespace roadcover {

namespace {

// Stream tags; stable across runs by construction.
constexpr std::uint64_t kTagInit = 1;
constexpr std::uint64_t kTagPair = 2;
constexpr std::uint64_t kTagMutate = 3;
constexpr std::uint64_t kTagSelect = 4;

struct AngleCache {
  const Scenario* scn;
  std::map<int, std::vector<double>> by_cell;

  const std::vector<double>& at(Cell c) {
    auto it = by_cell.find(scn->cell_index(c));
    if (it == by_cell.end())
      it = by_cell.emplace(scn->cell_index(c), candidate_angles(c, *scn)).first;
    return it->second;
  }
};

int init_gene_count_upper(const Scenario& s) { return wedge_sensor_bound(s) * 3; }

// One uniformly random chromosome with `count` genes at distinct free cells.
Chromosome random_chromosome(const Scenario& s, int count, AngleCache& angles,
                             RngStream& rng) {
  std::vector<Cell> cells = s.frees;
  Chromosome c;
  c.genes.reserve(count);
  for (int i = 0; i < count; ++i) {
    const std::size_t j = i + rng.uniform_index(cells.size() - i);
    std::swap(cells[i], cells[j]);
    const Cell pos = cells[i];
    const std::vector<double>& cand = angles.at(pos);
    c.genes.push_back(Gene{pos.x, pos.y, cand[rng.uniform_index(cand.size())]});
  }
  return c;
}

void validate_config(const GAConfig& cfg) {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (cfg.population_size < 2) throw std::invalid_argument("population_size must be >= 2");
  if (!prob(cfg.p_mut) || !prob(cfg.p_cross) || !prob(cfg.p_div) || !prob(cfg.p_add_gene))
    throw std::invalid_argument("probabilities must be in [0, 1]");
  if (cfg.stall_generations < 1) throw std::invalid_argument("stall_generations must be >= 1");
  if (cfg.max_generations < 1) throw std::invalid_argument("max_generations must be >= 1");
  if (cfg.mask_count < 1) throw std::invalid_argument("mask_count must be >= 1");
}

struct RankedGene {
  Gene g;
  std::vector<int> covered;  // street cell indices under the crossover mask
  int in_range = 0;
  bool taken = false;
};

// Ranking comparator shared by rank_genes, crossover and the greedy baseline:
// more new coverage first, then more street cells in range, then (y, x, phi).
bool rank_better(int cov_a, int in_a, const Gene& a, int cov_b, int in_b, const Gene& b) {
  if (cov_a != cov_b) return cov_a > cov_b;
  if (in_a != in_b) return in_a > in_b;
  return gene_lex_less(a, b);
}

}  // namespace

int wedge_sensor_bound(const Scenario& s) {
  const double wedge_area = s.sensor.range_m * s.sensor.range_m * s.sensor.fov_rad * 0.5;
  const double cells = std::ceil(s.n_road * s.grid_len * s.grid_len / wedge_area);
  return std::max(1, static_cast<int>(cells));
}

int effective_max_sensors(const Scenario& s, const GAConfig& cfg) {
  return cfg.max_sensors > 0 ? cfg.max_sensors : 4 * wedge_sensor_bound(s);
}

std::vector<Chromosome> init_population(const Scenario& s, const GAConfig& cfg,
                                        RngStream& rng) {
  if (s.frees.empty()) throw InfeasibleError("scenario has no free cells");
  if (s.streets.empty()) throw InfeasibleError("scenario has no street cells");
  const int upper = std::min<int>(init_gene_count_upper(s), static_cast<int>(s.frees.size()));
  AngleCache angles{&s, {}};
  std::vector<Chromosome> pop;
  pop.reserve(cfg.population_size);
  for (int i = 0; i < cfg.population_size; ++i)
    pop.push_back(random_chromosome(s, rng.uniform_int(1, upper), angles, rng));
  return pop;
}

std::vector<Gene> rank_genes(std::span<const Gene> genes, const std::vector<Cell>& uncovered,
                             const Scenario& s, const OcclusionMask& mask) {
  struct Entry {
    Gene g;
    int covered;
    int in_range;
  };
  std::vector<Entry> entries;
  entries.reserve(genes.size());
  for (const Gene& g : genes) {
    int cov = 0;
    for (const Cell& c : uncovered)
      if (covers(g, c, s, mask)) ++cov;
    entries.push_back(Entry{g, cov, cells_in_range(g.cell(), s)});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return rank_better(a.covered, a.in_range, a.g, b.covered, b.in_range, b.g);
  });
  std::vector<Gene> out;
  out.reserve(entries.size());
  for (const Entry& e : entries) out.push_back(e.g);
  return out;
}

Chromosome crossover(const Chromosome& a, const Chromosome& b, const Scenario& s,
                     const OcclusionMask& mask, const LosCache* los) {
  std::vector<RankedGene> pool;
  pool.reserve(a.genes.size() + b.genes.size());
  for (const Gene& g : a.genes)
    pool.push_back(RankedGene{g, covered_street_cells(g, s, mask, los),
                              cells_in_range(g.cell(), s), false});
  for (const Gene& g : b.genes)
    pool.push_back(RankedGene{g, covered_street_cells(g, s, mask, los),
                              cells_in_range(g.cell(), s), false});

  std::vector<std::uint8_t> uncovered(s.tags.size(), 0);
  for (const Cell& c : s.streets) uncovered[s.cell_index(c)] = 1;

  Chromosome child;
  std::unordered_set<int> used_positions;
  for (;;) {
    int best = -1, best_cov = -1, best_in = -1;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].taken) continue;
      int cov = 0;
      for (int idx : pool[i].covered) cov += uncovered[idx];
      if (best < 0 || rank_better(cov, pool[i].in_range, pool[i].g, best_cov, best_in,
                                  pool[best].g)) {
        best = static_cast<int>(i);
        best_cov = cov;
        best_in = pool[i].in_range;
      }
    }
    if (best < 0 || best_cov == 0) break;
    RankedGene& picked = pool[best];
    picked.taken = true;
    if (!used_positions.insert(s.cell_index(picked.g.cell())).second)
      continue;  // position already taken in the child: gene is skipped
    child.genes.push_back(picked.g);
    for (int idx : picked.covered) uncovered[idx] = 0;
  }
  return child;
}

Chromosome mutate(const Chromosome& c, const Scenario& s, const GAConfig& cfg,
                  RngStream& rng) {
  // Occupied = output positions so far plus the not-yet-processed originals,
  // so uniqueness holds regardless of later deletions.
  std::unordered_set<int> occupied;
  for (const Gene& g : c.genes) occupied.insert(s.cell_index(g.cell()));

  auto nearest_free = [&](double tx, double ty) -> std::optional<Cell> {
    std::optional<Cell> best;
    double best_d2 = 0.0;
    for (const Cell& f : s.frees) {
      if (occupied.count(s.cell_index(f))) continue;
      const double dx = f.x - tx, dy = f.y - ty;
      const double d2 = dx * dx + dy * dy;
      if (!best || d2 < best_d2 ||
          (d2 == best_d2 && yx_less(f, *best))) {
        best = f;
        best_d2 = d2;
      }
    }
    return best;
  };

  Chromosome out;
  out.genes.reserve(c.genes.size() + 1);
  for (const Gene& g : c.genes) {
    occupied.erase(s.cell_index(g.cell()));  // its own cell is available to it
    if (!rng.bernoulli(cfg.p_mut)) {
      out.genes.push_back(g);
      occupied.insert(s.cell_index(g.cell()));
      continue;
    }
    const int branch = rng.uniform_int(0, 2);
    if (branch == 0) {
      const double tx = g.x + rng.normal(0.0, cfg.sigma_pos_cells);
      const double ty = g.y + rng.normal(0.0, cfg.sigma_pos_cells);
      const std::optional<Cell> dest = nearest_free(std::round(tx), std::round(ty));
      if (dest) {
        out.genes.push_back(
            Gene{dest->x, dest->y, nearest_candidate_angle(*dest, g.phi, s)});
      } else {
        out.genes.push_back(g);  // nowhere to go
      }
    } else if (branch == 1) {
      const double target = wrap_angle(g.phi + rng.normal(0.0, cfg.sigma_ang_rad));
      out.genes.push_back(Gene{g.x, g.y, nearest_candidate_angle(g.cell(), target, s)});
    } else {
      continue;  // deletion
    }
    occupied.insert(s.cell_index(out.genes.back().cell()));
  }

  if (rng.bernoulli(cfg.p_add_gene) &&
      static_cast<int>(out.genes.size()) < effective_max_sensors(s, cfg)) {
    std::vector<Cell> open;
    for (const Cell& f : s.frees)
      if (!occupied.count(s.cell_index(f))) open.push_back(f);
    if (!open.empty()) {
      const Cell pos = open[rng.uniform_index(open.size())];
      const std::vector<double> cand = candidate_angles(pos, s);
      if (!cand.empty())
        out.genes.push_back(Gene{pos.x, pos.y, cand[rng.uniform_index(cand.size())]});
    }
  }
  return out;
}

std::vector<Chromosome> select_next_generation(const std::vector<Chromosome>& pool,
                                               const Scenario& s, const GAConfig& cfg,
                                               RngStream& rng) {
  const int n = cfg.population_size;
  if (static_cast<int>(pool.size()) < n)
    throw std::invalid_argument("selection pool smaller than the population size");
  for (const Chromosome& c : pool)
    if (!c.cached_fitness) throw std::invalid_argument("selection needs evaluated pool");

  std::vector<int> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    if (*pool[i].cached_fitness != *pool[j].cached_fitness)
      return *pool[i].cached_fitness > *pool[j].cached_fitness;
    return i < j;
  });

  const int elites = std::max(1, n / 10);
  int fresh = static_cast<int>(std::llround(cfg.p_div * n));
  fresh = std::min(fresh, n - elites);
  const int roulette = n - elites - fresh;

  std::vector<Chromosome> next;
  next.reserve(n);
  for (int i = 0; i < elites; ++i) next.push_back(pool[order[i]]);

  // Roulette wheel on fitness shifted to be strictly positive.
  double min_fit = std::numeric_limits<double>::infinity();
  for (const Chromosome& c : pool) min_fit = std::min(min_fit, *c.cached_fitness);
  std::vector<double> cumulative(pool.size());
  double total = 0.0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    total += *pool[i].cached_fitness + (1.0 - min_fit);
    cumulative[i] = total;
  }
  for (int i = 0; i < roulette; ++i) {
    const double u = rng.uniform01() * total;
    const std::size_t j =
        std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin();
    next.push_back(pool[std::min(j, pool.size() - 1)]);
  }

  AngleCache angles{&s, {}};
  const int upper = std::min<int>(init_gene_count_upper(s), static_cast<int>(s.frees.size()));
  for (int i = 0; i < fresh; ++i)
    next.push_back(random_chromosome(s, rng.uniform_int(1, upper), angles, rng));
  return next;
}

GAResult run_ga(const Scenario& s, const GAConfig& cfg, const RunOptions& opts) {
  validate_config(cfg);
  const FitnessWeights weights = default_weights(s.n_road);
  const VisibilityCache vis(s);
  const MaskSet masks(s, sample_occlusion_masks(s, cfg.seed, cfg.mask_count));

  RngStream init_rng = RngStream::derive(cfg.seed, {kTagInit});
  std::vector<Chromosome> pop = init_population(s, cfg, init_rng);

  GAResult result;
  result.seed = cfg.seed;
  double best_fitness = -std::numeric_limits<double>::infinity();
  int stall = 0;

  for (int gen = 0; gen < cfg.max_generations; ++gen) {
    // Pair parents at random; each pair breeds one child with p_cross.
    RngStream pair_rng = RngStream::derive(cfg.seed, {kTagPair, static_cast<std::uint64_t>(gen)});
    std::vector<int> perm(pop.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    pair_rng.shuffle(perm);
    const OcclusionMask& mask = masks.masks[gen % masks.size()];
    const LosCache& los = masks.los[gen % masks.size()];
    std::vector<std::pair<int, int>> breeding;
    for (std::size_t p = 0; p + 1 < perm.size(); p += 2)
      if (pair_rng.bernoulli(cfg.p_cross)) breeding.emplace_back(perm[p], perm[p + 1]);

    std::vector<Chromosome> children(breeding.size());
    parallel_for(static_cast<int>(breeding.size()), opts.threads, [&](int i) {
      children[i] = crossover(pop[breeding[i].first], pop[breeding[i].second], s, mask, &los);
    });
    if (opts.on_crossover) {
      for (std::size_t i = 0; i < breeding.size(); ++i)
        opts.on_crossover(CrossoverEvent{pop[breeding[i].first], pop[breeding[i].second],
                                         children[i], mask});
    }

    std::vector<Chromosome> pool = std::move(pop);
    for (Chromosome& c : children) pool.push_back(std::move(c));

    // Mutate everything except the elite at slot 0 (generation 0 has none).
    const int first_mutable = gen == 0 ? 0 : 1;
    for (std::size_t i = first_mutable; i < pool.size(); ++i) {
      RngStream mut_rng = RngStream::derive(
          cfg.seed, {kTagMutate, static_cast<std::uint64_t>(gen), static_cast<std::uint64_t>(i)});
      pool[i] = mutate(pool[i], s, cfg, mut_rng);
      pool[i].cached_fitness.reset();
    }

    parallel_for(static_cast<int>(pool.size()), opts.threads, [&](int i) {
      if (!pool[i].cached_fitness)
        pool[i].cached_fitness = evaluate_fitness_cached(pool[i].genes, vis, weights, masks);
    });

    double gen_best = -std::numeric_limits<double>::infinity();
    double mean = 0.0;
    int best_idx = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const double f = *pool[i].cached_fitness;
      mean += f;
      if (f > gen_best) {
        gen_best = f;
        best_idx = static_cast<int>(i);
      }
    }
    mean /= static_cast<double>(pool.size());
    if (gen_best > best_fitness) {
      best_fitness = gen_best;
      result.best = pool[best_idx];
    }
    result.history.push_back(GenerationStat{best_fitness, mean});
    result.generations_run = gen + 1;

    // Stop once the best fitness has stayed exactly constant for
    // stall_generations consecutive generations.
    if (gen > 0 && result.history[gen].best == result.history[gen - 1].best) {
      if (++stall >= cfg.stall_generations) break;
    } else {
      stall = 0;
    }

    RngStream sel_rng =
        RngStream::derive(cfg.seed, {kTagSelect, static_cast<std::uint64_t>(gen)});
    pop = select_next_generation(pool, s, cfg, sel_rng);
  }
  return result;
}

Chromosome greedy_baseline(const Scenario& s, const OcclusionMask& mask,
                           const LosCache* los) {
  struct Visible {
    double angle;
    int cell_idx;
  };
  struct Spot {
    Cell pos;
    std::vector<Visible> visible;  // in-range street cells with clear sight
    std::vector<double> angles;    // full candidate angle set
    int in_range = 0;
    bool taken = false;
  };

  const double r2 = s.sensor.range_m * s.sensor.range_m;
  const double half_fov = s.sensor.fov_rad * 0.5;
  std::vector<Spot> spots;
  spots.reserve(s.frees.size());
  for (const Cell& f : s.frees) {
    Spot spot;
    spot.pos = f;
    spot.angles = candidate_angles(f, s);
    for (const Cell& c : s.streets) {
      const double dx = (c.x - f.x) * s.grid_len;
      const double dy = (c.y - f.y) * s.grid_len;
      if (dx * dx + dy * dy > r2) continue;
      spot.in_range += 1;
      const bool clear = los ? los->line_of_sight(f, c) : line_of_sight(s, mask, f, c);
      if (clear)
        spot.visible.push_back(Visible{
            std::atan2(static_cast<double>(c.y - f.y), static_cast<double>(c.x - f.x)),
            s.cell_index(c)});
    }
    spots.push_back(std::move(spot));
  }

  std::vector<std::uint8_t> uncovered(s.tags.size(), 0);
  for (const Cell& c : s.streets) uncovered[s.cell_index(c)] = 1;

  Chromosome result;
  for (;;) {
    bool have_best = false;
    Gene best_gene;
    int best_cov = 0, best_in = 0;
    for (const Spot& spot : spots) {
      if (spot.taken || spot.visible.empty()) continue;
      for (double phi : spot.angles) {
        int cov = 0;
        for (const Visible& v : spot.visible)
          if (uncovered[v.cell_idx] && ang_dist(v.angle, phi) <= half_fov) ++cov;
        if (cov == 0) continue;
        const Gene g{spot.pos.x, spot.pos.y, phi};
        if (!have_best || rank_better(cov, spot.in_range, g, best_cov, best_in, best_gene)) {
          have_best = true;
          best_gene = g;
          best_cov = cov;
          best_in = spot.in_range;
        }
      }
    }
    if (!have_best) break;
    result.genes.push_back(best_gene);
    for (Spot& spot : spots) {
      if (spot.pos == best_gene.cell()) {
        spot.taken = true;
        for (const Visible& v : spot.visible)
          if (ang_dist(v.angle, best_gene.phi) <= half_fov) uncovered[v.cell_idx] = 0;
      }
    }
  }
  return result;
}

}  // namespace roadcover
