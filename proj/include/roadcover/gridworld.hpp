#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace roadcover {

// Cell tags of the environment grid. `SensorOccupied` never appears in a
// parsed map; it marks cells taken by a placed sensor at runtime.
enum class CellTag : std::uint8_t { Obstacle, Blocked, Street, Free, SensorOccupied };

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

// Row-then-column ordering; the deterministic tie-break used throughout.
inline bool yx_less(const Cell& a, const Cell& b) {
  return a.y != b.y ? a.y < b.y : a.x < b.x;
}

struct SensorSpec {
  double range_m = 0.0;
  double fov_rad = 0.0;
  friend bool operator==(const SensorSpec&, const SensorSpec&) = default;
};

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

struct OpacityEntry {
  Cell cell;
  double value = 0.0;
  friend bool operator==(const OpacityEntry&, const OpacityEntry&) = default;
};

// The environment model: grid of tagged cells, priority street cells that
// must be covered at least twice, and semi-transparent street cells whose
// opacity models dynamic occlusion by traffic.
//
// Geometry convention (fixed): origin at the top-left cell, x grows to the
// right, y grows downward, and the center of cell (x, y) sits at
// ((x+0.5)*grid_len, (y+0.5)*grid_len) in meters.
struct Scenario {
  int width = 0;
  int height = 0;
  double grid_len = 1.0;           // meters per cell
  double sensor_fov_deg = 0.0;     // as authored; fov_rad derives from it
  std::vector<CellTag> tags;       // row-major, index = y*width + x
  std::vector<std::uint8_t> priority_map;
  std::vector<OpacityEntry> opacity;  // sorted by (y, x)
  SensorSpec sensor;

  // Derived, set by finalize_scenario().
  int n_road = 0;
  std::vector<Cell> streets;
  std::vector<Cell> frees;
  std::vector<double> opacity_map;

  bool in_bounds(Cell c) const {
    return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height;
  }
  int cell_index(Cell c) const { return c.y * width + c.x; }
  Cell cell_at(int idx) const { return Cell{idx % width, idx / width}; }
  CellTag tag(Cell c) const { return tags[cell_index(c)]; }
  bool is_street(Cell c) const { return in_bounds(c) && tag(c) == CellTag::Street; }
  bool is_free(Cell c) const { return in_bounds(c) && tag(c) == CellTag::Free; }
  bool is_priority(Cell c) const { return priority_map[cell_index(c)] != 0; }
  double opacity_at(Cell c) const { return opacity_map[cell_index(c)]; }

  // Cell-center coordinates in meters.
  double center_x(int x) const { return (x + 0.5) * grid_len; }
  double center_y(int y) const { return (y + 0.5) * grid_len; }
  double center_dist(Cell a, Cell b) const {
    const double dx = (a.x - b.x) * grid_len;
    const double dy = (a.y - b.y) * grid_len;
    return std::sqrt(dx * dx + dy * dy);
  }

  friend bool operator==(const Scenario& a, const Scenario& b) {
    return a.width == b.width && a.height == b.height && a.grid_len == b.grid_len &&
           a.sensor_fov_deg == b.sensor_fov_deg && a.tags == b.tags &&
           a.priority_map == b.priority_map && a.opacity == b.opacity && a.sensor == b.sensor;
  }
};

// One sampled realization of the semi-transparent cells: every annotated
// cell is independently opaque with probability equal to its opacity.
struct OcclusionMask {
  std::vector<Cell> opaque_now;  // sorted by (y, x)
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> opaque_map;  // per-cell, sized like the scenario

  bool is_opaque(int cell_idx) const { return opaque_map[cell_idx] != 0; }
};

struct ScenarioStats {
  int n_road = 0;
  int n_obstacle = 0;
  int n_blocked = 0;
  int n_free = 0;
  int n_priority = 0;
};

// Recomputes derived fields and validates the scenario invariants.
// Throws ScenarioError on violation.
void finalize_scenario(Scenario& s);

Scenario parse_scenario(const std::string& doc);
std::string serialize_scenario(const Scenario& s);

std::vector<OcclusionMask> sample_occlusion_masks(const Scenario& s, std::uint64_t seed,
                                                  int count);

ScenarioStats scenario_stats(const Scenario& s);

}  // namespace roadcover
