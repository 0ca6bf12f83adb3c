#include "roadcover/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace roadcover {

namespace {

constexpr double kSnapTol = 1e-9;
constexpr double kIntTol = 1e-6;

std::optional<Cell> to_cell(double x, double y, const Scenario& s) {
  const double rx = std::round(x), ry = std::round(y);
  if (std::abs(x - rx) > kIntTol || std::abs(y - ry) > kIntTol) return std::nullopt;
  const Cell c{static_cast<int>(rx), static_cast<int>(ry)};
  if (!s.in_bounds(c)) return std::nullopt;
  return c;
}

// Snapped image of a gene under one group element, or nothing when the image
// is off-grid / non-integer.
std::optional<Gene> gene_image(const Gene& g, const SymmetryGroup& group, int element,
                               const Scenario& s) {
  const SymmetryGroup::Pose p = group.apply(element, {double(g.x), double(g.y), g.phi});
  const std::optional<Cell> c = to_cell(p.x, p.y, s);
  if (!c) return std::nullopt;
  return Gene{c->x, c->y, nearest_candidate_angle(*c, wrap_angle(p.phi), s)};
}

bool same_pose(const Gene& a, const Gene& b) {
  return a.x == b.x && a.y == b.y && ang_dist(a.phi, b.phi) <= kSnapTol;
}

}  // namespace

int SymmetryGroup::element_count() const {
  switch (kind) {
    case Kind::RotationC4: return 4;
    case Kind::MirrorVertical:
    case Kind::MirrorHorizontal: return 2;
    case Kind::Translation: return 2 * repeats + 1;
  }
  return 1;
}

SymmetryGroup::Pose SymmetryGroup::apply(int element, const Pose& p) const {
  switch (kind) {
    case Kind::RotationC4: {
      // Quarter turns about (cx, cy); directions rotate with positions.
      const int k = element & 3;
      double dx = p.x - cx, dy = p.y - cy;
      for (int i = 0; i < k; ++i) {
        const double t = dx;
        dx = -dy;
        dy = t;
      }
      return Pose{cx + dx, cy + dy, wrap_angle(p.phi + k * (kPi / 2.0))};
    }
    case Kind::MirrorVertical:
      if (element == 0) return p;
      return Pose{2.0 * axis_pos - p.x, p.y, wrap_angle(kPi - p.phi)};
    case Kind::MirrorHorizontal:
      if (element == 0) return p;
      return Pose{p.x, 2.0 * axis_pos - p.y, wrap_angle(-p.phi)};
    case Kind::Translation: {
      const int j = element - repeats;  // -repeats .. +repeats
      return Pose{p.x + j * vx, p.y + j * vy, p.phi};
    }
  }
  return p;
}

SymmetryGroup SymmetryGroup::parse(const std::string& text) {
  SymmetryGroup g;
  auto bad = [&]() -> SymmetryGroup& {
    throw std::invalid_argument("unrecognized symmetry declaration: '" + text + "'");
  };
  if (text.rfind("c4:", 0) == 0) {
    g.kind = Kind::RotationC4;
    const std::string rest = text.substr(3);
    const std::size_t comma = rest.find(',');
    if (comma == std::string::npos) bad();
    g.cx = std::stod(rest.substr(0, comma));
    g.cy = std::stod(rest.substr(comma + 1));
    return g;
  }
  if (text.rfind("mirror:", 0) == 0) {
    const std::string rest = text.substr(7);
    if (rest.rfind("x=", 0) == 0) {
      g.kind = Kind::MirrorVertical;
      g.axis_pos = std::stod(rest.substr(2));
      return g;
    }
    if (rest.rfind("y=", 0) == 0) {
      g.kind = Kind::MirrorHorizontal;
      g.axis_pos = std::stod(rest.substr(2));
      return g;
    }
    bad();
  }
  if (text == "translation:x") {
    g.kind = Kind::Translation;
    g.axis = Axis::X;
    return g;
  }
  if (text == "translation:y") {
    g.kind = Kind::Translation;
    g.axis = Axis::Y;
    return g;
  }
  bad();
  return g;
}

std::string SymmetryGroup::str() const {
  char buf[96];
  switch (kind) {
    case Kind::RotationC4:
      std::snprintf(buf, sizeof(buf), "c4:%g,%g", cx, cy);
      return buf;
    case Kind::MirrorVertical:
      std::snprintf(buf, sizeof(buf), "mirror:x=%g", axis_pos);
      return buf;
    case Kind::MirrorHorizontal:
      std::snprintf(buf, sizeof(buf), "mirror:y=%g", axis_pos);
      return buf;
    case Kind::Translation:
      return axis == Axis::X ? "translation:x" : "translation:y";
  }
  return "";
}

Chromosome augment_with_symmetry(const Chromosome& c, const SymmetryGroup& group,
                                 const Scenario& s) {
  Chromosome out;
  std::unordered_set<int> used;
  for (int e = 0; e < group.element_count(); ++e) {
    for (const Gene& g : c.genes) {
      const std::optional<Gene> img = gene_image(g, group, e, s);
      if (!img) continue;
      if (!s.is_free(img->cell())) continue;
      if (!used.insert(s.cell_index(img->cell())).second) continue;
      out.genes.push_back(*img);
    }
  }
  return out;
}

EliminationResult symmetry_eliminate(const Chromosome& augmented, const SymmetryGroup& group,
                                     const Scenario& s, const OcclusionMask& mask,
                                     int max_pattern_breaks, const LosCache* los) {
  struct Entry {
    Gene g;
    std::vector<int> covered;
    int multiplicity = 0;
    bool taken = false;
  };
  std::vector<Entry> pool;
  pool.reserve(augmented.genes.size());
  for (const Gene& g : augmented.genes)
    pool.push_back(Entry{g, covered_street_cells(g, s, mask, los), 0, false});

  // Multiplicity: how many (element, source gene) pairs land on this gene.
  for (Entry& e : pool) {
    for (int el = 0; el < group.element_count(); ++el) {
      for (const Gene& h : augmented.genes) {
        const std::optional<Gene> img = gene_image(h, group, el, s);
        if (img && same_pose(*img, e.g)) ++e.multiplicity;
      }
    }
  }

  std::vector<std::uint8_t> uncovered(s.tags.size(), 0);
  for (const Cell& c : s.streets) uncovered[s.cell_index(c)] = 1;

  EliminationResult result;
  std::vector<Gene> picked;

  auto compliant = [&](const Gene& g) {
    for (const Gene& h : picked) {
      for (int el = 0; el < group.element_count(); ++el) {
        const std::optional<Gene> img = gene_image(h, group, el, s);
        if (img && same_pose(*img, g)) return true;
      }
    }
    return false;
  };

  for (;;) {
    int best_c = -1, best_c_cov = 0;   // best compliant
    int best_n = -1, best_n_cov = 0;   // best non-compliant
    for (std::size_t i = 0; i < pool.size(); ++i) {
      Entry& e = pool[i];
      if (e.taken) continue;
      int cov = 0;
      for (int idx : e.covered) cov += uncovered[idx];
      const bool ok = picked.empty() || compliant(e.g);
      int& best = ok ? best_c : best_n;
      int& best_cov = ok ? best_c_cov : best_n_cov;
      auto better = [&](int bi, int bcov) {
        if (bi < 0) return true;
        const Entry& b = pool[bi];
        if (e.multiplicity != b.multiplicity) return e.multiplicity > b.multiplicity;
        if (cov != bcov) return cov > bcov;
        return gene_lex_less(e.g, b.g);
      };
      if (better(best, best_cov)) {
        best = static_cast<int>(i);
        best_cov = cov;
      }
    }

    int chosen = -1;
    if (best_c >= 0 && best_c_cov > 0) {
      chosen = best_c;
    } else if (best_n >= 0 && best_n_cov > 0) {
      // The symmetric pattern cannot grow but street cells remain: break it.
      ++result.pattern_breaks;
      if (result.pattern_breaks > max_pattern_breaks) {
        result.pattern_broken = true;
        break;
      }
      chosen = best_n;
    } else {
      break;  // no gene adds coverage
    }

    Entry& e = pool[chosen];
    e.taken = true;
    picked.push_back(e.g);
    for (int idx : e.covered) uncovered[idx] = 0;
  }

  result.chromosome.genes = std::move(picked);
  return result;
}

int default_pattern_break_budget(const Scenario& s) {
  // Connected components of the street set (4-connectivity).
  std::vector<int> comp(s.tags.size(), -1);
  int components = 0;
  std::vector<Cell> stack;
  for (const Cell& start : s.streets) {
    if (comp[s.cell_index(start)] >= 0) continue;
    ++components;
    stack.push_back(start);
    comp[s.cell_index(start)] = components;
    while (!stack.empty()) {
      const Cell c = stack.back();
      stack.pop_back();
      const Cell nbs[4] = {{c.x + 1, c.y}, {c.x - 1, c.y}, {c.x, c.y + 1}, {c.x, c.y - 1}};
      for (const Cell& n : nbs) {
        if (!s.is_street(n)) continue;
        if (comp[s.cell_index(n)] >= 0) continue;
        comp[s.cell_index(n)] = components;
        stack.push_back(n);
      }
    }
  }

  // Road ends on the boundary: maximal street runs along the border ring.
  std::vector<Cell> ring;
  for (int x = 0; x < s.width; ++x) ring.push_back({x, 0});
  for (int y = 1; y < s.height; ++y) ring.push_back({s.width - 1, y});
  if (s.height > 1)
    for (int x = s.width - 2; x >= 0; --x) ring.push_back({x, s.height - 1});
  if (s.width > 1)
    for (int y = s.height - 2; y >= 1; --y) ring.push_back({0, y});
  int runs = 0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const bool here = s.is_street(ring[i]);
    const bool prev = s.is_street(ring[(i + ring.size() - 1) % ring.size()]);
    if (here && !prev) ++runs;
  }
  if (runs == 0 && !ring.empty() && s.is_street(ring[0])) runs = 1;  // full street ring

  return components + runs;
}

Chromosome symmetrize_stage(const Chromosome& c, const SymmetryGroup& group,
                            const VisibilityCache& vis, const FitnessWeights& w,
                            const MaskSet& masks, int max_pattern_breaks) {
  const Scenario& s = vis.scenario();
  const Chromosome augmented = augment_with_symmetry(c, group, s);
  const EliminationResult elim =
      symmetry_eliminate(augmented, group, s, masks.masks[0], max_pattern_breaks, &masks.los[0]);
  Chromosome refined = local_search(elim.chromosome, vis, w, masks);
  const double input_fitness =
      c.cached_fitness ? *c.cached_fitness : evaluate_fitness_cached(c.genes, vis, w, masks);
  if (*refined.cached_fitness >= input_fitness) return refined;
  Chromosome keep = c;
  keep.cached_fitness = input_fitness;
  return keep;
}

Chromosome tile_motif(const Chromosome& c, Axis axis, int anchor, int period_cells,
                      const Scenario& s) {
  Chromosome out;
  std::unordered_set<int> used;
  const int span = axis == Axis::X ? s.width : s.height;
  for (const Gene& g : c.genes) {
    const int a = axis == Axis::X ? g.x : g.y;
    if (a < anchor || a >= anchor + period_cells) continue;
    const int j_lo = -((a - 0) / period_cells + 1);
    const int j_hi = (span - 1 - a) / period_cells + 1;
    for (int j = j_lo; j <= j_hi; ++j) {
      const Cell dest = axis == Axis::X ? Cell{g.x + j * period_cells, g.y}
                                        : Cell{g.x, g.y + j * period_cells};
      if (!s.is_free(dest)) continue;
      if (!used.insert(s.cell_index(dest)).second) continue;
      out.genes.push_back(Gene{dest.x, dest.y, nearest_candidate_angle(dest, g.phi, s)});
    }
  }
  std::sort(out.genes.begin(), out.genes.end(), gene_lex_less);
  return out;
}

TranslationResult optimize_translation(const Chromosome& c, const VisibilityCache& vis,
                                       const FitnessWeights& w, const MaskSet& masks,
                                       Axis axis) {
  const Scenario& s = vis.scenario();
  TranslationResult best;
  best.chromosome = c;
  double best_fitness = -std::numeric_limits<double>::infinity();
  bool found = false;

  const int max_period = std::max(1, static_cast<int>(2.0 * s.sensor.range_m / s.grid_len));
  for (int d = 1; d <= max_period; ++d) {
    // Candidate anchors: distinct gene axis coordinates (capped).
    std::vector<int> anchors;
    for (const Gene& g : c.genes) {
      const int a = axis == Axis::X ? g.x : g.y;
      if (std::find(anchors.begin(), anchors.end(), a) == anchors.end()) anchors.push_back(a);
    }
    std::sort(anchors.begin(), anchors.end());
    if (anchors.size() > 8) anchors.resize(8);

    for (int anchor : anchors) {
      const Chromosome tiled = tile_motif(c, axis, anchor, d, s);
      if (tiled.genes.empty()) continue;
      const Chromosome refined = local_search(tiled, vis, w, masks);
      if (!found || *refined.cached_fitness > best_fitness) {
        found = true;
        best_fitness = *refined.cached_fitness;
        best.period_m = d * s.grid_len;
        best.chromosome = refined;
      }
    }
  }
  if (!found) best.period_m = 0.0;
  return best;
}

}  // namespace roadcover
