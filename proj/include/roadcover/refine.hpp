#pragma once

#include <functional>

#include "roadcover/evolve.hpp"

namespace roadcover {

struct LocalSearchOptions {
  // When set, only genes for which this returns true may be moved, rotated
  // or deleted. Used by the stitcher to confine refinement to interfaces.
  std::function<bool(const Gene&)> movable;
};

// Steepest-ascent local search over single-sensor moves: relocation to any
// of the twelve cells at Manhattan distance 1 or 2 (evaluated at the ten
// candidate angles nearest the current orientation), re-orientation in place
// to the ten nearest candidate angles, and elimination. Applies the single
// best strictly improving move per iteration until no move improves.
Chromosome local_search(const Chromosome& c, const VisibilityCache& vis,
                        const FitnessWeights& w, const MaskSet& masks,
                        const LocalSearchOptions& opts = {});

// Convenience variant that builds the caches itself.
Chromosome local_search(const Chromosome& c, const Scenario& s, const FitnessWeights& w,
                        std::span<const OcclusionMask> masks,
                        const LocalSearchOptions& opts = {});

}  // namespace roadcover
