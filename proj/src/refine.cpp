#include "roadcover/refine.hpp"

#include <algorithm>
#include <map>

namespace roadcover {

namespace {

// The twelve next-nearest grid neighbors: all cells at Manhattan distance 1 or 2.
constexpr int kNeighborhood[12][2] = {
    {0, -2}, {-1, -1}, {0, -1}, {1, -1}, {-2, 0}, {-1, 0},
    {1, 0},  {2, 0},   {-1, 1}, {0, 1},  {1, 1},  {0, 2},
};

constexpr int kAngleFan = 10;  // candidate angles examined around the current one

struct Move {
  enum class Kind { None, Delete, Replace } kind = Kind::None;
  int gene_index = -1;
  Gene replacement;
};

}  // namespace

Chromosome local_search(const Chromosome& c, const VisibilityCache& vis,
                        const FitnessWeights& w, const MaskSet& masks,
                        const LocalSearchOptions& opts) {
  const Scenario& s = vis.scenario();
  Evaluator ev(vis, w, masks);
  std::vector<Gene> genes = c.genes;
  for (const Gene& g : genes) ev.add(g);

  std::map<int, std::vector<double>> angle_fan_base;  // full candidate set per cell
  auto fan = [&](Cell pos, double phi) {
    auto it = angle_fan_base.find(s.cell_index(pos));
    if (it == angle_fan_base.end())
      it = angle_fan_base.emplace(s.cell_index(pos), candidate_angles(pos, s)).first;
    std::vector<double> out = it->second;
    std::sort(out.begin(), out.end(), [&](double a, double b) {
      const double da = ang_dist(a, phi), db = ang_dist(b, phi);
      if (da != db) return da < db;
      return a < b;
    });
    if (static_cast<int>(out.size()) > kAngleFan) out.resize(kAngleFan);
    return out;
  };

  for (;;) {
    const double base = ev.fitness();
    Move best;
    double best_fitness = base;

    auto consider = [&](const Gene& original, int gi, const Move& move) {
      ev.remove(original);
      if (move.kind == Move::Kind::Replace) ev.add(move.replacement);
      const double f = ev.fitness();
      if (move.kind == Move::Kind::Replace) ev.remove(move.replacement);
      ev.add(original);
      if (f > best_fitness) {
        best_fitness = f;
        best = move;
        best.gene_index = gi;
      }
    };

    for (int gi = 0; gi < static_cast<int>(genes.size()); ++gi) {
      const Gene& g = genes[gi];
      if (opts.movable && !opts.movable(g)) continue;

      consider(g, gi, Move{Move::Kind::Delete, gi, {}});

      for (double phi : fan(g.cell(), g.phi)) {
        if (phi == g.phi) continue;
        consider(g, gi, Move{Move::Kind::Replace, gi, Gene{g.x, g.y, phi}});
      }

      for (const auto& d : kNeighborhood) {
        const Cell dest{g.x + d[0], g.y + d[1]};
        if (!s.is_free(dest)) continue;
        if (ev.occupied(dest)) continue;
        for (double phi : fan(dest, g.phi))
          consider(g, gi, Move{Move::Kind::Replace, gi, Gene{dest.x, dest.y, phi}});
      }
    }

    if (best.kind == Move::Kind::None) break;  // local optimum of the move set
    const Gene moved = genes[best.gene_index];
    ev.remove(moved);
    if (best.kind == Move::Kind::Replace) {
      ev.add(best.replacement);
      genes[best.gene_index] = best.replacement;
    } else {
      genes.erase(genes.begin() + best.gene_index);
    }
  }

  Chromosome out;
  out.genes = std::move(genes);
  out.cached_fitness = ev.fitness();
  return out;
}

Chromosome local_search(const Chromosome& c, const Scenario& s, const FitnessWeights& w,
                        std::span<const OcclusionMask> masks, const LocalSearchOptions& opts) {
  const VisibilityCache vis(s);
  const MaskSet mask_set(s, std::vector<OcclusionMask>(masks.begin(), masks.end()));
  return local_search(c, vis, w, mask_set, opts);
}

}  // namespace roadcover
