#pragma once

#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "roadcover/visibility.hpp"

namespace roadcover {

// Weights of the placement score: reward per covered street cell (alpha),
// reward per satisfied priority cell (beta), cost per deployed sensor
// (gamma), and the unit of the diminishing overlap reward (delta).
// Valid weight sets satisfy beta = alpha - delta, alpha > gamma, gamma > delta.
struct FitnessWeights {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;

  bool valid() const {
    return beta == alpha - delta && alpha > gamma && gamma > delta;
  }
};

// The standard weight set (2*n_road, 2*n_road - 1, n_road, 1).
// Throws std::invalid_argument when the street set is empty or the resulting
// weights violate the ordering constraints (n_road < 2).
FitnessWeights default_weights(int n_road);

struct CoverageMetrics {
  double c = 0.0;                 // covered street fraction, averaged over masks
  std::optional<double> c_eff;    // street area / deployed wedge area; absent for 0 sensors
  int n_sens = 0;
};

// Score of one configuration, averaged over the occlusion realizations:
// per mask, alpha*N_cov(1) + beta*N_prio - gamma*N_sens
//           + delta * sum_{n>=2} N_cov(n)/(n-1).
double evaluate_fitness(std::span<const Gene> genes, const Scenario& s,
                        const FitnessWeights& w, std::span<const OcclusionMask> masks);

CoverageMetrics coverage_metrics(std::span<const Gene> genes, const Scenario& s,
                                 std::span<const OcclusionMask> masks);

// Shared score formula; both the plain and the incremental path go through
// this so their results are bit-identical.
double fitness_from_tails(const std::vector<int>& n_ge, int n_prio, int n_sens,
                          const FitnessWeights& w);

// Same value as evaluate_fitness, computed through the caches.
double evaluate_fitness_cached(std::span<const Gene> genes, const VisibilityCache& vis,
                               const FitnessWeights& w, const MaskSet& masks);

// ---------------------------------------------------------------------------
// Incremental evaluator: maintains per-mask coverage counts for a sensor set
// under add/remove of single genes. Candidate-move loops in the local search
// and the stitcher lean on this instead of recomputing full fields.
// ---------------------------------------------------------------------------
class Evaluator {
 public:
  Evaluator(const VisibilityCache& vis, const FitnessWeights& w, const MaskSet& masks);

  void add(const Gene& g);
  void remove(const Gene& g);   // must match a present gene's position
  bool occupied(Cell c) const { return genes_.count(key(c)) != 0; }
  int sensor_count() const { return static_cast<int>(genes_.size()); }
  std::vector<Gene> genes() const;

  double fitness() const;
  CoverageMetrics metrics() const;
  int covered_at_least(int mask_i, int n) const;

 private:
  struct MaskState {
    std::vector<std::uint16_t> count;
    std::vector<int> n_ge;  // n_ge[0] = n_road, grown on demand
    int prio_ok = 0;        // priority cells with count >= 2
  };
  struct Placed {
    double phi;
    std::vector<std::vector<int>> covered;  // per mask
  };

  int key(Cell c) const { return vis_->scenario().cell_index(c); }
  const std::vector<std::vector<int>>& coverage_of(const Gene& g);
  void apply(const std::vector<std::vector<int>>& covered, int delta);

  const VisibilityCache* vis_;
  FitnessWeights w_;
  const MaskSet* masks_;
  std::vector<MaskState> state_;
  std::unordered_map<int, Placed> genes_;

  // Coverage lists keyed by (cell, orientation bits); grows with the set of
  // candidate moves examined, bounded by the discrete pose space.
  std::unordered_map<std::uint64_t, std::vector<std::vector<int>>> pose_cache_;
};

}  // namespace roadcover
