#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "roadcover/pipeline.hpp"
#include "roadcover/render.hpp"

namespace {

using namespace roadcover;

constexpr int kExitParse = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitSpecMismatch = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<int> masks;
  std::optional<int> trials;
  std::optional<int> threads;
  std::string svg_path;
};

void apply_overrides(RunConfig& cfg, const CommonFlags& flags) {
  if (flags.seed) cfg.ga.seed = *flags.seed;
  if (flags.masks) cfg.ga.mask_count = *flags.masks;
  if (flags.trials) cfg.trials = *flags.trials;
  if (flags.threads) cfg.threads = *flags.threads;
}

nlohmann::ordered_json metrics_block(std::span<const Gene> genes, const Scenario& s,
                                     const MaskSet& masks, const FitnessWeights& w) {
  const CoverageMetrics m = coverage_metrics(genes, s, masks.masks);
  nlohmann::ordered_json j;
  j["n_sens"] = m.n_sens;
  j["fitness"] = evaluate_fitness(genes, s, w, masks.masks);
  j["c"] = m.c;
  j["c_eff"] = m.c_eff ? nlohmann::ordered_json(*m.c_eff) : nlohmann::ordered_json(nullptr);
  return j;
}

int cmd_optimize(const std::string& scenario_path, const std::string& config_path,
                 const std::string& output_path, const CommonFlags& flags) {
  const std::string scenario_text = read_file(scenario_path);
  const Scenario s = parse_scenario(scenario_text);
  RunConfig cfg = parse_config(read_file(config_path));
  apply_overrides(cfg, flags);

  const PipelineResult pr = run_pipeline(s, cfg);
  write_file(output_path, build_result_doc(scenario_text, pr, cfg).dump(2) + "\n");
  if (!flags.svg_path.empty())
    write_file(flags.svg_path, render_svg(s, pr.best.genes, &pr.metrics));
  std::cout << "optimize: n_sens=" << pr.metrics.n_sens << " c=" << pr.metrics.c
            << " fitness=" << pr.fitness << " -> " << output_path << "\n";
  return 0;
}

int cmd_compare(const std::string& scenario_path, const std::string& config_path,
                const std::string& output_path, const CommonFlags& flags) {
  const std::string scenario_text = read_file(scenario_path);
  const Scenario s = parse_scenario(scenario_text);
  RunConfig cfg = parse_config(read_file(config_path));
  apply_overrides(cfg, flags);

  const PipelineResult pr = run_pipeline(s, cfg);
  const MaskSet masks(s, sample_occlusion_masks(s, cfg.ga.seed, cfg.ga.mask_count));
  const FitnessWeights w = default_weights(s.n_road);
  Chromosome greedy = greedy_baseline(s, masks.masks[0], &masks.los[0]);

  nlohmann::ordered_json doc;
  doc["pipeline"] = metrics_block(pr.best.genes, s, masks, w);
  doc["greedy"] = metrics_block(greedy.genes, s, masks, w);
  const auto& pe = doc["pipeline"]["c_eff"];
  const auto& ge = doc["greedy"]["c_eff"];
  doc["c_eff_gain"] = (pe.is_null() || ge.is_null() || ge.get<double>() == 0.0)
                          ? nlohmann::ordered_json(nullptr)
                          : nlohmann::ordered_json(pe.get<double>() / ge.get<double>() - 1.0);
  doc["config"] = config_echo(cfg);
  doc["scenario"] = scenario_text;

  const std::string text = doc.dump(2) + "\n";
  if (output_path.empty())
    std::cout << text;
  else
    write_file(output_path, text);
  return 0;
}

int cmd_render(const std::string& scenario_path, const std::string& result_path,
               const std::string& svg_path) {
  const Scenario s = parse_scenario(read_file(scenario_path));
  const LoadedResult result = load_result(read_file(result_path));
  std::vector<Gene> genes;
  for (const Gene& g : result.genes) {
    if (!s.in_bounds(g.cell())) throw ScenarioError("render: gene outside the grid");
    genes.push_back(Gene{g.x, g.y, nearest_candidate_angle(g.cell(), g.phi, s)});
  }
  const MaskSet masks(
      s, sample_occlusion_masks(s, result.doc.value("seed", std::uint64_t{1}),
                                std::max(1, result.doc["config"].value("mask_count", 4))));
  const CoverageMetrics m = coverage_metrics(genes, s, masks.masks);
  write_file(svg_path, render_svg(s, genes, &m));
  std::cout << "render: " << genes.size() << " sensors -> " << svg_path << "\n";
  return 0;
}

int cmd_evaluate(const std::string& result_path, const std::string& output_path) {
  const LoadedResult result = load_result(read_file(result_path));
  const Scenario& s = result.scenario;
  const std::uint64_t seed = result.doc.value("seed", std::uint64_t{1});
  const int mask_count = std::max(1, result.doc["config"].value("mask_count", 4));
  const MaskSet masks(s, sample_occlusion_masks(s, seed, mask_count));
  const FitnessWeights w = default_weights(s.n_road);

  nlohmann::ordered_json doc = metrics_block(result.genes, s, masks, w);
  const std::string text = doc.dump(2) + "\n";
  if (output_path.empty())
    std::cout << text;
  else
    write_file(output_path, text);
  return 0;
}

int cmd_stitch(const std::string& layout_path, const std::string& library_path,
               const std::string& config_path, const std::string& output_path,
               const CommonFlags& flags) {
  const Layout layout = parse_layout(read_file(layout_path));
  const FragmentLibrary lib = parse_fragment_library(read_file(library_path));
  RunConfig cfg = parse_config(read_file(config_path));
  apply_overrides(cfg, flags);

  const Assembly assembly = assemble_layout(layout, lib);
  const Scenario& s = assembly.scenario;
  const std::string scenario_text = serialize_scenario(s);
  const VisibilityCache vis(s);
  const MaskSet masks(s, sample_occlusion_masks(s, cfg.ga.seed, cfg.ga.mask_count));
  const FitnessWeights w = default_weights(s.n_road);

  StitchOptions opts;
  opts.trials = cfg.trials;
  opts.seed = cfg.ga.seed;
  opts.threads = cfg.threads;
  const StitchResult result = stitch_optimize(layout, lib, assembly, vis, w, masks, opts);

  const CoverageMetrics m = coverage_metrics(result.chromosome.genes, s, masks.masks);
  nlohmann::ordered_json doc;
  doc["genes"] = nlohmann::ordered_json::array();
  for (const Gene& g : result.chromosome.genes)
    doc["genes"].push_back({{"x", g.x}, {"y", g.y}, {"phi_deg", g.phi * (180.0 / kPi)}});
  doc["n_sens"] = m.n_sens;
  doc["fitness"] = result.fitness;
  doc["c"] = m.c;
  doc["c_eff"] = m.c_eff ? nlohmann::ordered_json(*m.c_eff) : nlohmann::ordered_json(nullptr);
  doc["trials"] = result.trials_run;
  doc["config"] = config_echo(cfg);
  doc["scenario"] = scenario_text;
  write_file(output_path, doc.dump(2) + "\n");
  if (!flags.svg_path.empty())
    write_file(flags.svg_path, render_svg(s, result.chromosome.genes, &m));
  std::cout << "stitch: n_sens=" << m.n_sens << " c=" << m.c << " fitness=" << result.fitness
            << " -> " << output_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"roadcover: optimized placement of directional roadside sensors"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string scenario_path, config_path, output_path, result_path, svg_out;
  std::string layout_path, library_path;

  auto add_common = [&](CLI::App* cmd, bool with_trials) {
    cmd->add_option("--seed", flags.seed, "override the config seed");
    cmd->add_option("--masks", flags.masks, "override the occlusion realization count");
    cmd->add_option("--threads", flags.threads, "evaluation worker count (0 = hardware)");
    cmd->add_option("--svg", flags.svg_path, "also write an SVG rendering");
    if (with_trials) cmd->add_option("--trials", flags.trials, "stitch trial count");
  };

  CLI::App* optimize = app.add_subcommand("optimize", "run the optimization pipeline");
  optimize->add_option("scenario", scenario_path)->required();
  optimize->add_option("config", config_path)->required();
  optimize->add_option("output", output_path)->required();
  add_common(optimize, false);

  CLI::App* compare = app.add_subcommand("compare", "pipeline vs greedy baseline");
  compare->add_option("scenario", scenario_path)->required();
  compare->add_option("config", config_path)->required();
  compare->add_option("--output", output_path, "write the comparison document here");
  add_common(compare, false);

  CLI::App* render = app.add_subcommand("render", "render a result to SVG");
  render->add_option("scenario", scenario_path)->required();
  render->add_option("result", result_path)->required();
  render->add_option("svg", svg_out)->required();

  CLI::App* evaluate = app.add_subcommand("evaluate", "metrics of an existing result");
  evaluate->add_option("result", result_path)->required();
  evaluate->add_option("--output", output_path, "write the metrics document here");

  CLI::App* stitch = app.add_subcommand("stitch", "assemble and optimize a fragment layout");
  stitch->add_option("layout", layout_path)->required();
  stitch->add_option("library", library_path)->required();
  stitch->add_option("config", config_path)->required();
  stitch->add_option("output", output_path)->required();
  add_common(stitch, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(optimize))
      return cmd_optimize(scenario_path, config_path, output_path, flags);
    if (app.got_subcommand(compare))
      return cmd_compare(scenario_path, config_path, output_path, flags);
    if (app.got_subcommand(render)) return cmd_render(scenario_path, result_path, svg_out);
    if (app.got_subcommand(evaluate)) return cmd_evaluate(result_path, output_path);
    if (app.got_subcommand(stitch))
      return cmd_stitch(layout_path, library_path, config_path, output_path, flags);
  } catch (const SpecMismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSpecMismatch;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const LayoutError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
