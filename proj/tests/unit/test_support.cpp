#include "test_support.hpp"

#include <algorithm>
#include <sstream>

namespace testsupport {

std::string scenario_doc(const std::vector<std::string>& rows, double grid_len, double range_m,
                         double fov_deg, const std::vector<OpacitySpec>& opacity) {
  std::ostringstream out;
  out << "grid_len=" << grid_len << "\n";
  out << "sensor_range=" << range_m << "\n";
  out << "sensor_fov_deg=" << fov_deg << "\n";
  for (const OpacitySpec& o : opacity)
    out << "opacity " << o.x << " " << o.y << " " << o.value << "\n";
  out << "\n";
  for (const std::string& row : rows) out << row << "\n";
  return out.str();
}

Scenario make_scenario(const std::vector<std::string>& rows, double grid_len, double range_m,
                       double fov_deg, const std::vector<OpacitySpec>& opacity) {
  return parse_scenario(scenario_doc(rows, grid_len, range_m, fov_deg, opacity));
}

OcclusionMask empty_mask(const Scenario& s) {
  OcclusionMask m;
  m.opaque_map.assign(s.tags.size(), 0);
  return m;
}

Scenario random_scenario(RngStream& rng, int w, int h, double p_obstacle, double p_street,
                         double range_m, double fov_deg) {
  for (;;) {
    std::vector<std::string> rows(h, std::string(w, '.'));
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double u = rng.uniform01();
        if (u < p_obstacle)
          rows[y][x] = '#';
        else if (u < p_obstacle + p_street)
          rows[y][x] = 'S';
      }
    }
    const Scenario s = make_scenario(rows, 1.0, range_m, fov_deg);
    if (s.n_road >= 2 && !s.frees.empty()) return s;
  }
}

std::vector<Gene> random_genes(RngStream& rng, const Scenario& s, int count) {
  std::vector<Gene> genes;
  std::vector<Cell> cells = s.frees;
  count = std::min<int>(count, static_cast<int>(cells.size()));
  for (int i = 0; i < count; ++i) {
    const std::size_t j = i + rng.uniform_index(cells.size() - i);
    std::swap(cells[i], cells[j]);
    const std::vector<double> cand = candidate_angles(cells[i], s);
    if (cand.empty()) continue;
    genes.push_back(Gene{cells[i].x, cells[i].y, cand[rng.uniform_index(cand.size())]});
  }
  return genes;
}

std::vector<Cell> segment_cells_oracle(Cell a, Cell b) {
  // Doubled integer coordinates: centers at odd integers, cell corners even.
  const long long x0 = 2ll * a.x + 1, y0 = 2ll * a.y + 1;
  const long long x1 = 2ll * b.x + 1, y1 = 2ll * b.y + 1;
  const long long dx = x1 - x0, dy = y1 - y0;

  std::vector<Cell> out;
  for (int y = std::min(a.y, b.y); y <= std::max(a.y, b.y); ++y) {
    for (int x = std::min(a.x, b.x); x <= std::max(a.x, b.x); ++x) {
      const long long bx0 = 2ll * x, by0 = 2ll * y, bx1 = bx0 + 2, by1 = by0 + 2;
      // Bounding interval overlap (inclusive).
      if (std::max(std::min(x0, x1), bx0) > std::min(std::max(x0, x1), bx1)) continue;
      if (std::max(std::min(y0, y1), by0) > std::min(std::max(y0, y1), by1)) continue;
      // All four corners strictly on one side of the carrier line => miss.
      auto side = [&](long long px, long long py) {
        const long long c = dx * (py - y0) - dy * (px - x0);
        return c > 0 ? 1 : (c < 0 ? -1 : 0);
      };
      const int s1 = side(bx0, by0), s2 = side(bx1, by0), s3 = side(bx0, by1),
                s4 = side(bx1, by1);
      if ((s1 > 0 && s2 > 0 && s3 > 0 && s4 > 0) ||
          (s1 < 0 && s2 < 0 && s3 < 0 && s4 < 0))
        continue;
      out.push_back(Cell{x, y});
    }
  }
  return out;
}

bool los_oracle(const Scenario& s, const OcclusionMask& mask, Cell from, Cell to) {
  for (const Cell& c : segment_cells_oracle(from, to)) {
    if (c == from || c == to) continue;
    const int idx = s.cell_index(c);
    if (s.tags[idx] == CellTag::Obstacle || mask.is_opaque(idx)) return false;
  }
  return true;
}

std::map<std::pair<int, int>, int> coverage_oracle(std::span<const Gene> genes,
                                                   const Scenario& s,
                                                   const OcclusionMask& mask) {
  std::map<std::pair<int, int>, int> counts;
  for (const Cell& c : s.streets) counts[{c.x, c.y}] = 0;
  for (const Gene& g : genes)
    for (const Cell& c : s.streets)
      if (covers(g, c, s, mask)) counts[{c.x, c.y}] += 1;
  return counts;
}

double fitness_formula_oracle(std::span<const Gene> genes, const Scenario& s,
                              const FitnessWeights& w, std::span<const OcclusionMask> masks) {
  const int n_sens = static_cast<int>(genes.size());
  double total = 0.0;
  for (const OcclusionMask& mask : masks) {
    const auto counts = coverage_oracle(genes, s, mask);
    auto n_cov = [&](int n) {
      int cells = 0;
      for (const auto& [cell, cnt] : counts)
        if (cnt >= n) ++cells;
      return cells;
    };
    int n_prio = 0;
    for (const auto& [cell, cnt] : counts)
      if (s.is_priority(Cell{cell.first, cell.second}) && cnt >= 2) ++n_prio;
    double f = w.alpha * n_cov(1) + w.beta * n_prio - w.gamma * n_sens;
    for (int n = 2; n <= n_sens; ++n) f += w.delta * n_cov(n) / (n - 1);
    total += f;
  }
  return total / static_cast<double>(masks.size());
}

}  // namespace testsupport
