#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "roadcover/fitness.hpp"

namespace roadcover {

class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// A candidate placement. No two genes share a position.
struct Chromosome {
  std::vector<Gene> genes;
  std::optional<double> cached_fitness;
  friend bool operator==(const Chromosome& a, const Chromosome& b) {
    return a.genes == b.genes;
  }
};

struct GAConfig {
  int population_size = 150;
  double p_mut = 0.1;
  double p_cross = 1.0;
  double p_div = 0.3;
  int stall_generations = 5;
  int max_generations = 500;
  int max_sensors = 0;  // 0 = automatic (4x the wedge-area lower bound)
  std::uint64_t seed = 1;
  int mask_count = 4;
  double sigma_pos_cells = 2.0;
  double sigma_ang_rad = 0.26;
  double p_add_gene = 0.1;
};

struct GenerationStat {
  double best = 0.0;
  double mean = 0.0;
};

struct GAResult {
  Chromosome best;
  std::vector<GenerationStat> history;
  int generations_run = 0;
  std::uint64_t seed = 0;
};

struct CrossoverEvent {
  const Chromosome& parent_a;
  const Chromosome& parent_b;
  const Chromosome& child;
  const OcclusionMask& mask;
};

struct RunOptions {
  int threads = 0;  // 0 = hardware concurrency
  std::function<void(const CrossoverEvent&)> on_crossover;  // called in breed order
};

// ceil(street area / wedge area): the minimum sensor count if no sensing
// space were wasted.
int wedge_sensor_bound(const Scenario& s);

int effective_max_sensors(const Scenario& s, const GAConfig& cfg);

// N random chromosomes; gene counts are uniform in [1, 3x wedge bound],
// positions unique free cells, orientations uniform candidate angles.
std::vector<Chromosome> init_population(const Scenario& s, const GAConfig& cfg,
                                        RngStream& rng);

// Genes ordered by (uncovered street cells covered, street cells in range,
// (y, x, phi)), best first.
std::vector<Gene> rank_genes(std::span<const Gene> genes, const std::vector<Cell>& uncovered,
                             const Scenario& s, const OcclusionMask& mask);

// Sequential gene-ranking crossover: repeatedly moves the best-ranked gene of
// the combined parent pool into the child and removes its covered cells from
// the open set; stops when the best remaining gene adds nothing. Genes whose
// position is already taken in the child are skipped.
Chromosome crossover(const Chromosome& a, const Chromosome& b, const Scenario& s,
                     const OcclusionMask& mask, const LosCache* los = nullptr);

// Gaussian mutation: each gene independently mutates with probability p_mut
// (position shift, orientation shift, or deletion, equally likely); an extra
// random gene is appended with probability p_add_gene.
Chromosome mutate(const Chromosome& c, const Scenario& s, const GAConfig& cfg,
                  RngStream& rng);

// Resizes the breeding pool back to N: fittest 10% (which includes the
// elite), p_div*N fresh random chromosomes, and roulette-wheel picks for the
// remainder. The elite comes first in the returned population.
std::vector<Chromosome> select_next_generation(const std::vector<Chromosome>& pool,
                                               const Scenario& s, const GAConfig& cfg,
                                               RngStream& rng);

GAResult run_ga(const Scenario& s, const GAConfig& cfg, const RunOptions& opts = {});

// Deterministic baseline: repeatedly places the (free cell, candidate angle)
// gene covering the most uncovered street cells until no gene adds coverage.
Chromosome greedy_baseline(const Scenario& s, const OcclusionMask& mask,
                           const LosCache* los = nullptr);

}  // namespace roadcover
