#include "roadcover/stitch.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "json.hpp"
#include "roadcover/parallel.hpp"

namespace roadcover {

namespace {

using nlohmann::ordered_json;

constexpr std::uint64_t kTagTrial = 0x74726c;  // "trl"

struct Transform {
  int piece_w = 0, piece_h = 0;
  bool mirror = false;
  int quarter_turns = 0;  // 0..3
  int off_x = 0, off_y = 0;

  Cell apply_cell(Cell c) const {
    if (mirror) c.x = piece_w - 1 - c.x;
    for (int k = 0; k < quarter_turns; ++k) {
      const int w = (k % 2 == 0) ? piece_w : piece_h;
      c = Cell{w - 1 - c.y, c.x};
    }
    return Cell{c.x + off_x, c.y + off_y};
  }

  // Continuous boundary points in cell-corner units.
  std::pair<double, double> apply_corner(double x, double y) const {
    if (mirror) x = piece_w - x;
    for (int k = 0; k < quarter_turns; ++k) {
      const int w = (k % 2 == 0) ? piece_w : piece_h;
      const double t = x;
      x = w - y;
      y = t;
    }
    return {x + off_x, y + off_y};
  }

  double apply_angle(double phi) const {
    if (mirror) phi = kPi - phi;
    return wrap_angle(phi + quarter_turns * (kPi / 2.0));
  }

  std::pair<int, int> global_dims() const {
    return quarter_turns % 2 == 0 ? std::pair{piece_w, piece_h}
                                  : std::pair{piece_h, piece_w};
  }
};

Transform make_transform(const Placement& p, const Fragment& f, bool mirror_override) {
  if (p.rotation % 90 != 0)
    throw LayoutError("placement '" + p.id + "': rotation must be a multiple of 90");
  Transform t;
  t.piece_w = f.piece.width;
  t.piece_h = f.piece.height;
  t.mirror = mirror_override;
  t.quarter_turns = ((p.rotation / 90) % 4 + 4) % 4;
  t.off_x = p.off_x;
  t.off_y = p.off_y;
  return t;
}

int tag_precedence(CellTag t) {
  switch (t) {
    case CellTag::Obstacle: return 3;
    case CellTag::Street: return 2;
    case CellTag::Free: return 1;
    default: return 0;
  }
}

// Whether the piece map itself is invariant under its local x-flip; only such
// pieces may have their mirror state toggled during trials.
bool mirrorable(const Scenario& piece) {
  for (int y = 0; y < piece.height; ++y) {
    for (int x = 0; x < piece.width; ++x) {
      const Cell a{x, y}, b{piece.width - 1 - x, y};
      if (piece.tag(a) != piece.tag(b)) return false;
      if (piece.is_priority(a) != piece.is_priority(b)) return false;
      if (piece.opacity_at(a) != piece.opacity_at(b)) return false;
    }
  }
  return true;
}

Axis segment_local_axis(const Fragment& f) {
  int min_x = INT_MAX, max_x = INT_MIN, min_y = INT_MAX, max_y = INT_MIN;
  for (const Cell& c : f.piece.streets) {
    min_x = std::min(min_x, c.x);
    max_x = std::max(max_x, c.x);
    min_y = std::min(min_y, c.y);
    max_y = std::max(max_y, c.y);
  }
  return (max_x - min_x) >= (max_y - min_y) ? Axis::X : Axis::Y;
}

int segment_period_cells(const Fragment& f) {
  if (f.period_m)
    return std::max(1, static_cast<int>(std::llround(*f.period_m / f.piece.grid_len)));
  int min_a = INT_MAX, max_a = INT_MIN;
  const Axis axis = segment_local_axis(f);
  for (const Cell& c : f.piece.streets) {
    const int a = axis == Axis::X ? c.x : c.y;
    min_a = std::min(min_a, a);
    max_a = std::max(max_a, a);
  }
  return std::max(1, max_a - min_a + 1);
}

FragmentKind parse_kind(const std::string& s) {
  if (s == "junction") return FragmentKind::Junction;
  if (s == "straight_segment") return FragmentKind::StraightSegment;
  throw LayoutError("unknown fragment kind: '" + s + "'");
}

std::string kind_name(FragmentKind k) {
  return k == FragmentKind::Junction ? "junction" : "straight_segment";
}

}  // namespace

const Fragment* FragmentLibrary::find(const std::string& id) const {
  for (const Fragment& f : fragments)
    if (f.id == id) return &f;
  return nullptr;
}

FragmentLibrary parse_fragment_library(const std::string& json_text) {
  FragmentLibrary lib;
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw LayoutError(std::string("fragment library is not valid JSON: ") + e.what());
  }
  if (!doc.contains("fragments") || !doc["fragments"].is_array())
    throw LayoutError("fragment library: missing 'fragments' array");
  for (const auto& jf : doc["fragments"]) {
    Fragment f;
    f.id = jf.at("id").get<std::string>();
    f.kind = parse_kind(jf.at("kind").get<std::string>());
    f.piece = parse_scenario(jf.at("scenario").get<std::string>());
    if (jf.contains("period_m") && !jf["period_m"].is_null())
      f.period_m = jf["period_m"].get<double>();
    for (const auto& jg : jf.at("solution")) {
      Gene g;
      g.x = jg.at("x").get<int>();
      g.y = jg.at("y").get<int>();
      const double phi_deg = jg.at("phi_deg").get<double>();
      g.phi = nearest_candidate_angle(g.cell(), wrap_angle(phi_deg * (kPi / 180.0)), f.piece);
      if (!f.piece.is_free(g.cell()))
        throw LayoutError("fragment '" + f.id + "': solution gene on non-free cell");
      f.solution.genes.push_back(g);
    }
    if (jf.contains("ports")) {
      for (const auto& jp : jf["ports"]) {
        Port p;
        p.name = jp.at("name").get<std::string>();
        p.x = jp.at("x").get<double>();
        p.y = jp.at("y").get<double>();
        f.ports.push_back(p);
      }
    }
    lib.fragments.push_back(std::move(f));
  }
  return lib;
}

std::string serialize_fragment_library(const FragmentLibrary& lib) {
  ordered_json doc;
  doc["fragments"] = ordered_json::array();
  for (const Fragment& f : lib.fragments) {
    ordered_json jf;
    jf["id"] = f.id;
    jf["kind"] = kind_name(f.kind);
    if (f.period_m)
      jf["period_m"] = *f.period_m;
    else
      jf["period_m"] = nullptr;
    jf["scenario"] = serialize_scenario(f.piece);
    jf["solution"] = ordered_json::array();
    for (const Gene& g : f.solution.genes)
      jf["solution"].push_back({{"x", g.x}, {"y", g.y}, {"phi_deg", g.phi * (180.0 / kPi)}});
    jf["ports"] = ordered_json::array();
    for (const Port& p : f.ports)
      jf["ports"].push_back({{"name", p.name}, {"x", p.x}, {"y", p.y}});
    doc["fragments"].push_back(std::move(jf));
  }
  return doc.dump(2) + "\n";
}

Layout parse_layout(const std::string& json_text) {
  Layout layout;
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw LayoutError(std::string("layout is not valid JSON: ") + e.what());
  }
  for (const auto& jp : doc.at("placements")) {
    Placement p;
    p.id = jp.at("id").get<std::string>();
    p.fragment_id = jp.at("fragment").get<std::string>();
    p.off_x = jp.at("offset").at(0).get<int>();
    p.off_y = jp.at("offset").at(1).get<int>();
    if (jp.contains("rotation")) p.rotation = jp["rotation"].get<int>();
    if (jp.contains("mirror")) p.mirror = jp["mirror"].get<bool>();
    layout.placements.push_back(std::move(p));
  }
  if (doc.contains("connections")) {
    for (const auto& jc : doc["connections"]) {
      auto split = [](const std::string& ref) {
        const std::size_t colon = ref.find(':');
        if (colon == std::string::npos)
          throw LayoutError("connection reference must be 'placement:port': '" + ref + "'");
        return PortRef{ref.substr(0, colon), ref.substr(colon + 1)};
      };
      layout.connections.emplace_back(split(jc.at(0).get<std::string>()),
                                      split(jc.at(1).get<std::string>()));
    }
  }
  return layout;
}

std::string serialize_layout(const Layout& layout) {
  ordered_json doc;
  doc["placements"] = ordered_json::array();
  for (const Placement& p : layout.placements)
    doc["placements"].push_back({{"id", p.id},
                                 {"fragment", p.fragment_id},
                                 {"offset", {p.off_x, p.off_y}},
                                 {"rotation", p.rotation},
                                 {"mirror", p.mirror}});
  doc["connections"] = ordered_json::array();
  for (const auto& [a, b] : layout.connections)
    doc["connections"].push_back(
        {a.placement_id + ":" + a.port_name, b.placement_id + ":" + b.port_name});
  return doc.dump(2) + "\n";
}

Assembly assemble_layout(const Layout& layout, const FragmentLibrary& lib) {
  if (layout.placements.empty()) throw LayoutError("layout has no placements");

  // Homogeneity and extents.
  const Fragment* first = lib.find(layout.placements.front().fragment_id);
  if (!first) throw LayoutError("unknown fragment: " + layout.placements.front().fragment_id);
  int gw = 0, gh = 0;
  for (const Placement& p : layout.placements) {
    const Fragment* f = lib.find(p.fragment_id);
    if (!f) throw LayoutError("unknown fragment: " + p.fragment_id);
    if (f->piece.sensor != first->piece.sensor || f->piece.grid_len != first->piece.grid_len)
      throw SpecMismatchError("fragments with mismatched sensor specs cannot be stitched");
    if (p.off_x < 0 || p.off_y < 0)
      throw LayoutError("placement '" + p.id + "': negative offset");
    const Transform t = make_transform(p, *f, p.mirror);
    const auto [w, h] = t.global_dims();
    gw = std::max(gw, p.off_x + w);
    gh = std::max(gh, p.off_y + h);
  }

  Assembly out;
  Scenario& g = out.scenario;
  g.width = gw;
  g.height = gh;
  g.grid_len = first->piece.grid_len;
  g.sensor = first->piece.sensor;
  g.sensor_fov_deg = first->piece.sensor_fov_deg;
  g.tags.assign(static_cast<std::size_t>(gw) * gh, CellTag::Blocked);
  g.priority_map.assign(g.tags.size(), 0);

  for (const Placement& p : layout.placements) {
    const Fragment* f = lib.find(p.fragment_id);
    const Transform t = make_transform(p, *f, p.mirror);
    for (int y = 0; y < f->piece.height; ++y) {
      for (int x = 0; x < f->piece.width; ++x) {
        const Cell src{x, y};
        const Cell dst = t.apply_cell(src);
        const CellTag tag = f->piece.tag(src);
        CellTag& slot = g.tags[g.cell_index(dst)];
        if (tag == CellTag::Street && slot == CellTag::Street)
          throw LayoutError("overlapping street cells at (" + std::to_string(dst.x) + "," +
                            std::to_string(dst.y) + ")");
        if (tag_precedence(tag) > tag_precedence(slot)) slot = tag;
        if (f->piece.is_priority(src)) g.priority_map[g.cell_index(dst)] = 1;
        const double op = f->piece.opacity_at(src);
        if (op > 0.0) g.opacity.push_back(OpacityEntry{dst, op});
      }
    }
  }
  finalize_scenario(g);

  // Connected ports must land on the same global point.
  for (const auto& [ra, rb] : layout.connections) {
    auto resolve = [&](const PortRef& r) -> std::pair<double, double> {
      for (const Placement& p : layout.placements) {
        if (p.id != r.placement_id) continue;
        const Fragment* f = lib.find(p.fragment_id);
        const Transform t = make_transform(p, *f, p.mirror);
        for (const Port& port : f->ports)
          if (port.name == r.port_name) return t.apply_corner(port.x, port.y);
        throw LayoutError("dangling port: " + r.placement_id + ":" + r.port_name);
      }
      throw LayoutError("dangling port (no such placement): " + r.placement_id);
    };
    const auto pa = resolve(ra);
    const auto pb = resolve(rb);
    if (std::abs(pa.first - pb.first) > 1e-6 || std::abs(pa.second - pb.second) > 1e-6)
      throw LayoutError("connected ports do not coincide: " + ra.placement_id + ":" +
                        ra.port_name + " vs " + rb.placement_id + ":" + rb.port_name);
    out.interfaces.push_back(pa);
  }

  // Global solution: transformed fragment genes, duplicates merged.
  std::unordered_set<int> used;
  for (const Placement& p : layout.placements) {
    const Fragment* f = lib.find(p.fragment_id);
    const Transform t = make_transform(p, *f, p.mirror);
    for (const Gene& gene : f->solution.genes) {
      const Cell dst = t.apply_cell(gene.cell());
      if (!g.is_free(dst)) continue;
      if (!used.insert(g.cell_index(dst)).second) continue;
      out.chromosome.genes.push_back(
          Gene{dst.x, dst.y,
               nearest_candidate_angle(dst, t.apply_angle(gene.phi), g)});
    }
  }
  return out;
}

StitchResult stitch_optimize(const Layout& layout, const FragmentLibrary& lib,
                             const Assembly& assembly, const VisibilityCache& vis,
                             const FitnessWeights& w, const MaskSet& masks,
                             const StitchOptions& opts) {
  const Scenario& g = vis.scenario();
  const int n_place = static_cast<int>(layout.placements.size());

  struct PlaceInfo {
    const Fragment* fragment;
    const Placement* placement;
    bool can_flip;
    bool is_segment;
    Axis global_axis = Axis::X;  // shift direction after rotation
    int period_cells = 1;
  };
  std::vector<PlaceInfo> info;
  info.reserve(n_place);
  for (const Placement& p : layout.placements) {
    const Fragment* f = lib.find(p.fragment_id);
    PlaceInfo pi{f, &p, mirrorable(f->piece), f->kind == FragmentKind::StraightSegment};
    if (pi.is_segment) {
      const Axis local = segment_local_axis(*f);
      const bool swap = (p.rotation / 90) % 2 != 0;
      pi.global_axis = swap ? (local == Axis::X ? Axis::Y : Axis::X) : local;
      pi.period_cells = segment_period_cells(*f);
    }
    info.push_back(pi);
  }

  // Snapped base gene set of one placement for a given mirror state; shifts
  // translate this set rigidly without re-snapping, so inter-sensor
  // geometry is preserved exactly.
  auto base_genes = [&](int pi_idx, bool mirror) {
    const PlaceInfo& pi = info[pi_idx];
    const Transform t = make_transform(*pi.placement, *pi.fragment, mirror);
    std::vector<Gene> out;
    for (const Gene& gene : pi.fragment->solution.genes) {
      const Cell dst = t.apply_cell(gene.cell());
      if (!g.in_bounds(dst)) continue;
      out.push_back(Gene{dst.x, dst.y, nearest_candidate_angle(dst, t.apply_angle(gene.phi), g)});
    }
    return out;
  };
  auto shifted = [&](std::vector<Gene> genes, const PlaceInfo& pi, int shift) {
    for (Gene& gene : genes) {
      if (pi.global_axis == Axis::X)
        gene.x += shift;
      else
        gene.y += shift;
    }
    std::erase_if(genes, [&](const Gene& gene) { return !g.is_free(gene.cell()); });
    return genes;
  };

  struct TrialOutcome {
    Chromosome chromosome;
    double fitness = -std::numeric_limits<double>::infinity();
  };
  std::vector<TrialOutcome> outcomes(std::max(1, opts.trials));

  auto run_trial = [&](int trial) {
    RngStream rng = RngStream::derive(opts.seed, {kTagTrial, static_cast<std::uint64_t>(trial)});
    std::vector<bool> mirror(n_place);
    std::vector<int> shift(n_place, 0);
    for (int i = 0; i < n_place; ++i) {
      const bool declared = info[i].placement->mirror;
      // Trial 0 is the layout as declared; later trials randomize flippable pieces.
      mirror[i] = (trial == 0 || !info[i].can_flip) ? declared : rng.bernoulli(0.5);
    }

    Evaluator ev(vis, w, masks);
    std::vector<std::vector<Gene>> current(n_place);
    auto insert_genes = [&](const std::vector<Gene>& genes, std::vector<Gene>& kept) {
      kept.clear();
      for (const Gene& gene : genes) {
        if (ev.occupied(gene.cell())) continue;
        ev.add(gene);
        kept.push_back(gene);
      }
    };
    for (int i = 0; i < n_place; ++i)
      insert_genes(shifted(base_genes(i, mirror[i]), info[i], shift[i]), current[i]);

    // Greedy pass, placement by placement: best (mirror, shift) keeping
    // everything else fixed.
    for (int i = 0; i < n_place; ++i) {
      const PlaceInfo& pi = info[i];
      std::vector<bool> mirror_options = {mirror[i]};
      if (pi.can_flip) mirror_options.push_back(!mirror[i]);
      double best_f = -std::numeric_limits<double>::infinity();
      bool best_m = mirror[i];
      int best_s = shift[i];
      for (bool m : mirror_options) {
        const std::vector<Gene> base = base_genes(i, m);
        const int max_shift = pi.is_segment ? pi.period_cells : 1;
        for (int sft = 0; sft < max_shift; ++sft) {
          // Evaluate option (m, sft) in place of the current gene set.
          for (const Gene& gene : current[i]) ev.remove(gene);
          std::vector<Gene> kept;
          insert_genes(shifted(base, pi, sft), kept);
          const double f = ev.fitness();
          for (const Gene& gene : kept) ev.remove(gene);
          for (const Gene& gene : current[i]) ev.add(gene);
          if (f > best_f) {
            best_f = f;
            best_m = m;
            best_s = sft;
          }
        }
      }
      if (best_m != mirror[i] || best_s != shift[i]) {
        for (const Gene& gene : current[i]) ev.remove(gene);
        mirror[i] = best_m;
        shift[i] = best_s;
        insert_genes(shifted(base_genes(i, best_m), pi, best_s), current[i]);
      }
    }

    Chromosome stitched;
    stitched.genes = ev.genes();

    LocalSearchOptions ls_opts;
    if (!opts.full_local_search) {
      const double reach = 2.0 * g.sensor.range_m;
      const std::vector<std::pair<double, double>> interfaces = assembly.interfaces;
      const double l = g.grid_len;
      ls_opts.movable = [interfaces, reach, l](const Gene& gene) {
        const double gx = (gene.x + 0.5) * l, gy = (gene.y + 0.5) * l;
        for (const auto& [px, py] : interfaces) {
          const double dx = gx - px * l, dy = gy - py * l;
          if (dx * dx + dy * dy <= reach * reach) return true;
        }
        return false;
      };
    }
    const Chromosome refined = local_search(stitched, vis, w, masks, ls_opts);
    outcomes[trial] = TrialOutcome{refined, *refined.cached_fitness};
  };

  const int trials = std::max(1, opts.trials);
  parallel_for(trials, opts.threads, run_trial);

  StitchResult result;
  result.trials_run = trials;
  int best = 0;
  for (int t = 1; t < trials; ++t)
    if (outcomes[t].fitness > outcomes[best].fitness) best = t;
  result.chromosome = outcomes[best].chromosome;
  result.fitness = outcomes[best].fitness;
  return result;
}

}  // namespace roadcover
