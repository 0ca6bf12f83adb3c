#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "roadcover/refine.hpp"

namespace roadcover {

class LayoutError : public std::runtime_error {
 public:
  explicit LayoutError(const std::string& what) : std::runtime_error(what) {}
};

// Fragments combined in one layout must share grid resolution and sensor spec.
class SpecMismatchError : public std::runtime_error {
 public:
  explicit SpecMismatchError(const std::string& what) : std::runtime_error(what) {}
};

// Connection point on a fragment boundary, in cell-corner units (so a port on
// the east edge of a 30-wide piece has x = 30).
struct Port {
  std::string name;
  double x = 0.0;
  double y = 0.0;
};

enum class FragmentKind { Junction, StraightSegment };

// An elementary map unit with its optimized placement.
struct Fragment {
  std::string id;
  FragmentKind kind = FragmentKind::Junction;
  Scenario piece;
  Chromosome solution;
  std::vector<Port> ports;
  std::optional<double> period_m;  // translation period of a segment motif
};

struct FragmentLibrary {
  std::vector<Fragment> fragments;
  const Fragment* find(const std::string& id) const;
};

struct Placement {
  std::string id;           // instance name, unique in the layout
  std::string fragment_id;
  int off_x = 0, off_y = 0;
  int rotation = 0;         // degrees, one of 0/90/180/270
  bool mirror = false;      // piece-local x-flip, applied before rotation
};

struct PortRef {
  std::string placement_id;
  std::string port_name;
};

struct Layout {
  std::vector<Placement> placements;
  std::vector<std::pair<PortRef, PortRef>> connections;
};

FragmentLibrary parse_fragment_library(const std::string& json_text);
std::string serialize_fragment_library(const FragmentLibrary& lib);
Layout parse_layout(const std::string& json_text);
std::string serialize_layout(const Layout& layout);

struct Assembly {
  Scenario scenario;
  Chromosome chromosome;  // union of the transformed fragment solutions
  std::vector<std::pair<double, double>> interfaces;  // connected ports, corner units
};

// Builds the global scenario and solution from the placed fragments.
// Throws LayoutError on street overlap, dangling or non-coincident ports;
// SpecMismatchError on heterogeneous sensor specs or grid resolutions.
Assembly assemble_layout(const Layout& layout, const FragmentLibrary& lib);

struct StitchOptions {
  int trials = 10;
  std::uint64_t seed = 1;
  bool full_local_search = false;  // default: refine only near interfaces
  int threads = 0;
};

struct StitchResult {
  Chromosome chromosome;
  double fitness = 0.0;
  int trials_run = 0;
};

// Mirror-and-shift search: per trial, draws random mirror states (where the
// piece geometry allows flipping), then greedily picks per placement the
// mirror state and, for straight segments, the rigid integer-cell shift of
// its sensor ensemble that maximizes global fitness; each trial ends with a
// local search around the interfaces. Trial 0 always starts from the layout
// as declared, so the result is never worse than the naive assembly.
StitchResult stitch_optimize(const Layout& layout, const FragmentLibrary& lib,
                             const Assembly& assembly, const VisibilityCache& vis,
                             const FitnessWeights& w, const MaskSet& masks,
                             const StitchOptions& opts = {});

}  // namespace roadcover
