#include "roadcover/pipeline.hpp"

#include <sstream>

namespace roadcover {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

int priority_satisfied_min(std::span<const Gene> genes, const Scenario& s,
                           std::span<const OcclusionMask> masks) {
  int result = -1;
  for (const OcclusionMask& mask : masks) {
    const CoverageField field = coverage_counts(genes, s, mask);
    int n = 0;
    for (const Cell& c : s.streets)
      if (s.is_priority(c) && field.counts[s.cell_index(c)] >= 2) ++n;
    result = result < 0 ? n : std::min(result, n);
  }
  return std::max(result, 0);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("malformed config line: '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "population_size") cfg.ga.population_size = std::stoi(value);
      else if (key == "p_mut") cfg.ga.p_mut = std::stod(value);
      else if (key == "p_cross") cfg.ga.p_cross = std::stod(value);
      else if (key == "p_div") cfg.ga.p_div = std::stod(value);
      else if (key == "stall_generations") cfg.ga.stall_generations = std::stoi(value);
      else if (key == "max_generations") cfg.ga.max_generations = std::stoi(value);
      else if (key == "max_sensors") cfg.ga.max_sensors = std::stoi(value);
      else if (key == "seed") cfg.ga.seed = std::stoull(value);
      else if (key == "mask_count") cfg.ga.mask_count = std::stoi(value);
      else if (key == "sigma_pos_cells") cfg.ga.sigma_pos_cells = std::stod(value);
      else if (key == "sigma_ang_rad") cfg.ga.sigma_ang_rad = std::stod(value);
      else if (key == "p_add_gene") cfg.ga.p_add_gene = std::stod(value);
      else if (key == "symmetry") cfg.symmetry = SymmetryGroup::parse(value);
      else if (key == "max_pattern_breaks") cfg.max_pattern_breaks = std::stoi(value);
      else if (key == "trials") cfg.trials = std::stoi(value);
      else if (key == "threads") cfg.threads = std::stoi(value);
      else throw std::invalid_argument("unknown config key: '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("invalid value for config key '" + key + "': '" + value + "'");
    }
  }
  return cfg;
}

nlohmann::ordered_json config_echo(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["population_size"] = cfg.ga.population_size;
  j["p_mut"] = cfg.ga.p_mut;
  j["p_cross"] = cfg.ga.p_cross;
  j["p_div"] = cfg.ga.p_div;
  j["stall_generations"] = cfg.ga.stall_generations;
  j["max_generations"] = cfg.ga.max_generations;
  j["max_sensors"] = cfg.ga.max_sensors;
  j["seed"] = cfg.ga.seed;
  j["mask_count"] = cfg.ga.mask_count;
  j["sigma_pos_cells"] = cfg.ga.sigma_pos_cells;
  j["sigma_ang_rad"] = cfg.ga.sigma_ang_rad;
  j["p_add_gene"] = cfg.ga.p_add_gene;
  j["symmetry"] = cfg.symmetry ? nlohmann::ordered_json(cfg.symmetry->str())
                               : nlohmann::ordered_json(nullptr);
  j["max_pattern_breaks"] = cfg.max_pattern_breaks
                                ? nlohmann::ordered_json(*cfg.max_pattern_breaks)
                                : nlohmann::ordered_json(nullptr);
  j["trials"] = cfg.trials;
  j["threads"] = cfg.threads;
  return j;
}

PipelineResult run_pipeline(const Scenario& s, const RunConfig& cfg,
                            const std::function<void(const CrossoverEvent&)>& on_crossover) {
  RunOptions opts;
  opts.threads = cfg.threads;
  opts.on_crossover = on_crossover;

  PipelineResult pr;
  pr.ga = run_ga(s, cfg.ga, opts);
  pr.trace.push_back(StageTrace{"ga", *pr.ga.best.cached_fitness});

  const FitnessWeights weights = default_weights(s.n_road);
  const VisibilityCache vis(s);
  const MaskSet masks(s, sample_occlusion_masks(s, cfg.ga.seed, cfg.ga.mask_count));

  Chromosome current = local_search(pr.ga.best, vis, weights, masks);
  pr.trace.push_back(StageTrace{"local_search", *current.cached_fitness});

  if (cfg.symmetry) {
    if (cfg.symmetry->kind == SymmetryGroup::Kind::Translation) {
      const TranslationResult tr =
          optimize_translation(current, vis, weights, masks, cfg.symmetry->axis);
      if (tr.period_m > 0.0 && tr.chromosome.cached_fitness &&
          *tr.chromosome.cached_fitness >= *current.cached_fitness) {
        current = tr.chromosome;
        pr.period_m = tr.period_m;
      }
      pr.trace.push_back(StageTrace{"translation", *current.cached_fitness});
    } else {
      const int budget =
          cfg.max_pattern_breaks ? *cfg.max_pattern_breaks : default_pattern_break_budget(s);
      current = symmetrize_stage(current, *cfg.symmetry, vis, weights, masks, budget);
      pr.trace.push_back(StageTrace{"symmetrize", *current.cached_fitness});
    }
  }

  current = local_search(current, vis, weights, masks);
  pr.trace.push_back(StageTrace{"final_local_search", *current.cached_fitness});

  std::sort(current.genes.begin(), current.genes.end(), gene_lex_less);
  pr.best = current;
  pr.fitness = *current.cached_fitness;
  pr.metrics = coverage_metrics(pr.best.genes, s, masks.masks);
  pr.priority_total = scenario_stats(s).n_priority;
  pr.priority_satisfied = priority_satisfied_min(pr.best.genes, s, masks.masks);
  return pr;
}

nlohmann::ordered_json build_result_doc(const std::string& scenario_text,
                                        const PipelineResult& pr, const RunConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["genes"] = nlohmann::ordered_json::array();
  for (const Gene& g : pr.best.genes)
    doc["genes"].push_back({{"x", g.x}, {"y", g.y}, {"phi_deg", g.phi * (180.0 / kPi)}});
  doc["n_sens"] = pr.metrics.n_sens;
  doc["fitness"] = pr.fitness;
  doc["c"] = pr.metrics.c;
  doc["c_eff"] = pr.metrics.c_eff ? nlohmann::ordered_json(*pr.metrics.c_eff)
                                  : nlohmann::ordered_json(nullptr);
  doc["priority_total"] = pr.priority_total;
  doc["priority_satisfied"] = pr.priority_satisfied;
  doc["period_m"] =
      pr.period_m ? nlohmann::ordered_json(*pr.period_m) : nlohmann::ordered_json(nullptr);
  doc["stage_trace"] = nlohmann::ordered_json::array();
  for (const StageTrace& st : pr.trace)
    doc["stage_trace"].push_back({{"stage", st.stage}, {"fitness", st.fitness}});
  doc["generations"] = pr.ga.generations_run;
  doc["seed"] = pr.ga.seed;
  doc["config"] = config_echo(cfg);
  doc["scenario"] = scenario_text;
  return doc;
}

LoadedResult load_result(const std::string& json_text) {
  LoadedResult out;
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw ScenarioError(std::string("result document is not valid JSON: ") + e.what());
  }
  if (!doc.contains("scenario") || !doc.contains("genes"))
    throw ScenarioError("result document missing 'scenario' or 'genes'");
  out.scenario = parse_scenario(doc["scenario"].get<std::string>());
  for (const auto& jg : doc["genes"]) {
    Gene g;
    g.x = jg.at("x").get<int>();
    g.y = jg.at("y").get<int>();
    const double phi = jg.at("phi_deg").get<double>() * (kPi / 180.0);
    // Degrees round-tripped through text; snap back onto the candidate set.
    g.phi = nearest_candidate_angle(g.cell(), wrap_angle(phi), out.scenario);
    out.genes.push_back(g);
  }
  out.doc = std::move(doc);
  return out;
}

}  // namespace roadcover
