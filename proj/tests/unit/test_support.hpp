#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "roadcover/fitness.hpp"

namespace testsupport {

using namespace roadcover;

struct OpacitySpec {
  int x, y;
  double value;
};

std::string scenario_doc(const std::vector<std::string>& rows, double grid_len, double range_m,
                         double fov_deg, const std::vector<OpacitySpec>& opacity = {});

Scenario make_scenario(const std::vector<std::string>& rows, double grid_len, double range_m,
                       double fov_deg, const std::vector<OpacitySpec>& opacity = {});

OcclusionMask empty_mask(const Scenario& s);

// Random map with obstacles, streets and free cells; guaranteed >= 2 street
// cells and >= 1 free cell.
Scenario random_scenario(RngStream& rng, int w, int h, double p_obstacle, double p_street,
                         double range_m, double fov_deg);

std::vector<Gene> random_genes(RngStream& rng, const Scenario& s, int count);

// Exact integer-arithmetic oracle: all cells whose closed square the segment
// between the two cell centers intersects (touching counts).
std::vector<Cell> segment_cells_oracle(Cell a, Cell b);

bool los_oracle(const Scenario& s, const OcclusionMask& mask, Cell from, Cell to);

// Literal transcription of the score formula, computed from per-cell counts
// assembled with the covers() predicate; the tail sum runs to the sensor
// count exactly as written.
double fitness_formula_oracle(std::span<const Gene> genes, const Scenario& s,
                              const FitnessWeights& w, std::span<const OcclusionMask> masks);

std::map<std::pair<int, int>, int> coverage_oracle(std::span<const Gene> genes,
                                                   const Scenario& s,
                                                   const OcclusionMask& mask);

}  // namespace testsupport
