#pragma once

#include <span>
#include <string>

#include "roadcover/fitness.hpp"

namespace roadcover {

struct RenderOptions {
  double px_per_m = 8.0;
};

// SVG figure of the scenario with the sensor placement overlaid: cells
// colored by tag, priority cells marked, one translucent FoV wedge per
// sensor, and a legend with the coverage metrics.
// Throws std::invalid_argument when a gene lies outside the grid.
std::string render_svg(const Scenario& s, std::span<const Gene> genes,
                       const CoverageMetrics* metrics, const RenderOptions& opts = {});

}  // namespace roadcover
