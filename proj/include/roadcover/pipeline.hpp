#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "roadcover/stitch.hpp"
#include "roadcover/symmetry.hpp"

namespace roadcover {

// Everything a run needs beyond the scenario, read from a flat key=value
// config file. Angles are degrees at file surfaces and radians internally.
struct RunConfig {
  GAConfig ga;
  std::optional<SymmetryGroup> symmetry;
  std::optional<int> max_pattern_breaks;  // default: estimated from the map
  int trials = 10;                        // stitching
  int threads = 0;                        // 0 = hardware concurrency
};

RunConfig parse_config(const std::string& text);
nlohmann::ordered_json config_echo(const RunConfig& cfg);

struct StageTrace {
  std::string stage;
  double fitness = 0.0;
};

struct PipelineResult {
  Chromosome best;
  double fitness = 0.0;
  CoverageMetrics metrics;
  int priority_total = 0;
  int priority_satisfied = 0;  // minimum over masks
  std::vector<StageTrace> trace;
  std::optional<double> period_m;
  GAResult ga;
};

// The full optimization pipeline: genetic run, local search, the declared
// symmetry stage (if any), and a final local search.
PipelineResult run_pipeline(const Scenario& s, const RunConfig& cfg,
                            const std::function<void(const CrossoverEvent&)>& on_crossover = {});

// Result document (self-contained: embeds the scenario text).
nlohmann::ordered_json build_result_doc(const std::string& scenario_text,
                                        const PipelineResult& pr, const RunConfig& cfg);

struct LoadedResult {
  Scenario scenario;
  std::vector<Gene> genes;  // orientations re-snapped to candidate angles
  nlohmann::ordered_json doc;
};

LoadedResult load_result(const std::string& json_text);

}  // namespace roadcover
