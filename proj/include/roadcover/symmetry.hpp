#pragma once

#include <optional>
#include <string>

#include "roadcover/refine.hpp"

namespace roadcover {

enum class Axis { X, Y };

// A declared symmetry of the map, in cell units. Group operations must map
// grid cells onto grid cells; images that do not are dropped during
// augmentation.
struct SymmetryGroup {
  enum class Kind { RotationC4, MirrorVertical, MirrorHorizontal, Translation };

  Kind kind = Kind::RotationC4;
  double cx = 0.0, cy = 0.0;  // rotation center
  double axis_pos = 0.0;      // mirror line (x = axis_pos or y = axis_pos)
  Axis axis = Axis::X;        // translation axis
  double vx = 0.0, vy = 0.0;  // translation vector, cells
  int repeats = 1;            // translation copies per direction

  // Pose transform of the k-th group element; k = 0 is the identity.
  struct Pose {
    double x, y, phi;
  };
  int element_count() const;
  Pose apply(int element, const Pose& p) const;

  // Config syntax: "c4:<cx>,<cy>", "mirror:x=<v>", "mirror:y=<v>",
  // "translation:x", "translation:y".
  static SymmetryGroup parse(const std::string& text);
  std::string str() const;
};

// Adds every group image of every gene; images off-grid, on non-free cells,
// or at already-used positions are dropped. Orientations are re-snapped to
// the candidate angles of the image cell.
Chromosome augment_with_symmetry(const Chromosome& c, const SymmetryGroup& group,
                                 const Scenario& s);

struct EliminationResult {
  Chromosome chromosome;
  int pattern_breaks = 0;
  bool pattern_broken = false;  // break budget exhausted; result is best-effort
};

// Sequential elimination over an augmented solution, ranked by (multiplicity
// in the augmented set, new street cells covered, (y,x,phi)). After the first
// pick, a gene is compliant when some group element maps an already picked
// gene onto it; accepting a non-compliant gene records a pattern break.
EliminationResult symmetry_eliminate(const Chromosome& augmented, const SymmetryGroup& group,
                                     const Scenario& s, const OcclusionMask& mask,
                                     int max_pattern_breaks, const LosCache* los = nullptr);

// Pattern-break budget heuristic: street connected components plus the number
// of road ends touching the map boundary.
int default_pattern_break_budget(const Scenario& s);

// Augment -> eliminate -> local search, returning the better of the input and
// the symmetrized result, so the stage never degrades a solution.
Chromosome symmetrize_stage(const Chromosome& c, const SymmetryGroup& group,
                            const VisibilityCache& vis, const FitnessWeights& w,
                            const MaskSet& masks, int max_pattern_breaks);

// Tiles the motif (genes with axis coordinate in [anchor, anchor + period))
// across the scenario with the given period, in cells. Images are snapped and
// deduplicated like augmentation.
Chromosome tile_motif(const Chromosome& c, Axis axis, int anchor, int period_cells,
                      const Scenario& s);

struct TranslationResult {
  double period_m = 0.0;
  Chromosome chromosome;
};

// Scans candidate periods d in [grid_len, 2r] (step grid_len) and a small set
// of motif anchors; tiles, refines and scores each, returning the best.
TranslationResult optimize_translation(const Chromosome& c, const VisibilityCache& vis,
                                       const FitnessWeights& w, const MaskSet& masks,
                                       Axis axis);

}  // namespace roadcover
