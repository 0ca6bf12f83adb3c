#pragma once

#include <atomic>
#include <cstdlib>
#include <memory>
#include <span>
#include <vector>

#include "roadcover/gridworld.hpp"
#include "roadcover/rng.hpp"

namespace roadcover {

// One placed sensor: grid position plus orientation angle relative to the
// +x axis (y grows downward). Orientations are always snapped to the
// discrete candidate-angle set of the position.
struct Gene {
  int x = 0;
  int y = 0;
  double phi = 0.0;  // radians, in (-pi, pi]
  Cell cell() const { return Cell{x, y}; }
  friend bool operator==(const Gene&, const Gene&) = default;
};

// Deterministic total order: (y, x, phi).
inline bool gene_lex_less(const Gene& a, const Gene& b) {
  if (a.y != b.y) return a.y < b.y;
  if (a.x != b.x) return a.x < b.x;
  return a.phi < b.phi;
}

// Normalizes an angle to (-pi, pi].
inline double wrap_angle(double a) {
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

// Absolute angular distance in [0, pi].
inline double ang_dist(double a, double b) { return std::abs(std::remainder(a - b, kTwoPi)); }

// Per-street-cell coverage counts of a sensor set under one occlusion
// realization, plus the derived tail counts n_cov(n) = number of street
// cells covered at least n times.
struct CoverageField {
  std::vector<std::uint16_t> counts;  // per-cell, non-street cells stay 0
  std::vector<int> n_ge;              // n_ge[n] = #street cells with count >= n

  int n_cov(int n) const {
    if (n < 0) return 0;
    return n < static_cast<int>(n_ge.size()) ? n_ge[n] : 0;
  }
};

// Visits every cell whose closed square the segment between the centers of
// `a` and `b` intersects (supercover traversal). When the segment passes
// exactly through a lattice corner, both side cells are visited as well, so
// sight lines cannot leak between diagonally adjacent obstacles. The visitor
// returns false to stop early; the function returns false iff stopped.
template <typename Visit>
bool supercover_visit(Cell a, Cell b, Visit&& visit) {
  const int nx = std::abs(b.x - a.x), ny = std::abs(b.y - a.y);
  const int sx = b.x > a.x ? 1 : -1, sy = b.y > a.y ? 1 : -1;
  int x = a.x, y = a.y;
  if (!visit(Cell{x, y})) return false;
  int ix = 0, iy = 0;
  while (ix < nx || iy < ny) {
    // Compares the next vertical crossing (ix+0.5)/nx with the next
    // horizontal crossing (iy+0.5)/ny in exact integer arithmetic.
    const long long decision =
        (1ll + 2ll * ix) * ny - (1ll + 2ll * iy) * nx;
    if (decision == 0) {
      // Exact corner crossing: touch both side cells, then step diagonally.
      if (!visit(Cell{x + sx, y})) return false;
      if (!visit(Cell{x, y + sy})) return false;
      x += sx;
      y += sy;
      ++ix;
      ++iy;
    } else if (decision < 0) {
      x += sx;
      ++ix;
    } else {
      y += sy;
      ++iy;
    }
    if (!visit(Cell{x, y})) return false;
  }
  return true;
}

// Sorted, deduplicated (tolerance 1e-9 rad) viewing angles from the center
// of `pos` to the centers of all street cells.
std::vector<double> candidate_angles(Cell pos, const Scenario& s);

// Nearest candidate angle to `phi` at `pos` by circular distance;
// ties resolved toward the smaller angle value. Returns `phi` unchanged when
// the scenario has no street cells.
double nearest_candidate_angle(Cell pos, double phi, const Scenario& s);

// The `k` candidate angles closest to `phi`, ordered by (distance, value).
std::vector<double> nearest_candidate_angles(Cell pos, double phi, int k, const Scenario& s);

// True iff the open sight segment between the two cell centers crosses no
// obstacle cell and no mask-opaque cell. The endpoint cells themselves never
// block.
bool line_of_sight(const Scenario& s, const OcclusionMask& mask, Cell from, Cell to);

// True iff `cell` is within range, inside the FoV wedge (both boundaries
// inclusive), and in line of sight of the gene.
bool covers(const Gene& g, Cell cell, const Scenario& s, const OcclusionMask& mask);

CoverageField coverage_counts(std::span<const Gene> genes, const Scenario& s,
                              const OcclusionMask& mask);

// Number of street cells within Euclidean distance r of `pos` (no FoV, no
// line-of-sight filtering); the secondary ranking criterion.
int cells_in_range(Cell pos, const Scenario& s);

// ---------------------------------------------------------------------------
// Engine-side caches. Both are immutable after construction (LosCache memoizes
// through atomics) and safe for concurrent use.
// ---------------------------------------------------------------------------

class VisibilityCache {
 public:
  struct InRange {
    double angle;  // atan2 from this cell's center to the street cell center
    int cell_idx;
  };

  explicit VisibilityCache(const Scenario& s);

  const Scenario& scenario() const { return *scn_; }
  // Street cells within sensor range of `pos`, sorted by angle.
  std::span<const InRange> in_range(Cell pos) const {
    const auto& v = in_range_[scn_->cell_index(pos)];
    return {v.data(), v.size()};
  }
  int cells_in_range(Cell pos) const {
    return static_cast<int>(in_range_[scn_->cell_index(pos)].size());
  }

 private:
  const Scenario* scn_;
  std::vector<std::vector<InRange>> in_range_;
};

// Memoized line-of-sight oracle for one (scenario, mask) pair. Falls back to
// direct evaluation on maps too large for a dense pair table.
class LosCache {
 public:
  LosCache(const Scenario& s, const OcclusionMask& mask);

  bool line_of_sight(Cell a, Cell b) const;
  const OcclusionMask& mask() const { return *mask_; }

 private:
  const Scenario* scn_;
  const OcclusionMask* mask_;
  std::size_t n_ = 0;
  std::unique_ptr<std::atomic<std::uint8_t>[]> memo_;  // 0 unknown, 1 false, 2 true
};

// A fixed set of occlusion realizations for one optimization run, with one
// LoS cache per mask.
struct MaskSet {
  std::vector<OcclusionMask> masks;
  std::vector<LosCache> los;

  MaskSet(const Scenario& s, std::vector<OcclusionMask> m) : masks(std::move(m)) {
    los.reserve(masks.size());
    for (const OcclusionMask& mask : masks) los.emplace_back(s, mask);
  }
  std::size_t size() const { return masks.size(); }
};

// Street cells covered by a gene under one mask, as scenario cell indices.
std::vector<int> covered_street_cells(const Gene& g, const VisibilityCache& vis,
                                      const LosCache& los);

// Same, without the range cache; uses `los` for memoized sight checks when
// given, otherwise evaluates sight lines directly against the mask.
std::vector<int> covered_street_cells(const Gene& g, const Scenario& s,
                                      const OcclusionMask& mask,
                                      const LosCache* los = nullptr);

}  // namespace roadcover
