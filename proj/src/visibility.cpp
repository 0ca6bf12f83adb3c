#include "roadcover/visibility.hpp"

#include <algorithm>
#include <cmath>

namespace roadcover {

namespace {

constexpr double kAngleDedupTol = 1e-9;

// Largest dense LoS memo: pairs tables beyond this cell count fall back to
// direct evaluation.
constexpr std::size_t kMaxMemoCells = 3000;

bool blocks_sight(const Scenario& s, const OcclusionMask& mask, Cell c) {
  const int idx = s.cell_index(c);
  return s.tags[idx] == CellTag::Obstacle || mask.is_opaque(idx);
}

}  // namespace

std::vector<double> candidate_angles(Cell pos, const Scenario& s) {
  std::vector<double> angles;
  angles.reserve(s.streets.size());
  for (const Cell& c : s.streets) {
    if (c == pos) continue;  // no direction from a cell to itself
    angles.push_back(std::atan2(static_cast<double>(c.y - pos.y),
                                static_cast<double>(c.x - pos.x)));
  }
  std::sort(angles.begin(), angles.end());
  std::vector<double> out;
  out.reserve(angles.size());
  for (double a : angles) {
    if (out.empty() || a - out.back() > kAngleDedupTol) out.push_back(a);
  }
  // Merge across the -pi/pi wrap.
  if (out.size() > 1 && (out.front() + kTwoPi) - out.back() <= kAngleDedupTol) out.pop_back();
  return out;
}

double nearest_candidate_angle(Cell pos, double phi, const Scenario& s) {
  double best = phi;
  double best_dist = -1.0;
  for (const Cell& c : s.streets) {
    if (c == pos) continue;
    const double a = std::atan2(static_cast<double>(c.y - pos.y),
                                static_cast<double>(c.x - pos.x));
    const double d = ang_dist(a, phi);
    if (best_dist < 0.0 || d < best_dist - kAngleDedupTol ||
        (std::abs(d - best_dist) <= kAngleDedupTol && a < best)) {
      best = a;
      best_dist = d;
    }
  }
  return best;
}

std::vector<double> nearest_candidate_angles(Cell pos, double phi, int k, const Scenario& s) {
  std::vector<double> all = candidate_angles(pos, s);
  std::sort(all.begin(), all.end(), [&](double a, double b) {
    const double da = ang_dist(a, phi), db = ang_dist(b, phi);
    if (da != db) return da < db;
    return a < b;
  });
  if (static_cast<int>(all.size()) > k) all.resize(k);
  return all;
}

bool line_of_sight(const Scenario& s, const OcclusionMask& mask, Cell from, Cell to) {
  return supercover_visit(from, to, [&](Cell c) {
    if (c == from || c == to) return true;
    return !blocks_sight(s, mask, c);
  });
}

bool covers(const Gene& g, Cell cell, const Scenario& s, const OcclusionMask& mask) {
  const double dx = (cell.x - g.x) * s.grid_len;
  const double dy = (cell.y - g.y) * s.grid_len;
  if (dx * dx + dy * dy > s.sensor.range_m * s.sensor.range_m) return false;
  const double a = std::atan2(static_cast<double>(cell.y - g.y),
                              static_cast<double>(cell.x - g.x));
  if (ang_dist(a, g.phi) > s.sensor.fov_rad * 0.5) return false;
  return line_of_sight(s, mask, g.cell(), cell);
}

CoverageField coverage_counts(std::span<const Gene> genes, const Scenario& s,
                              const OcclusionMask& mask) {
  CoverageField field;
  field.counts.assign(s.tags.size(), 0);
  int max_count = 0;
  for (const Gene& g : genes) {
    for (const Cell& c : s.streets) {
      if (covers(g, c, s, mask)) {
        const int idx = s.cell_index(c);
        ++field.counts[idx];
        max_count = std::max(max_count, static_cast<int>(field.counts[idx]));
      }
    }
  }
  // n_ge[n] via histogram suffix sums; n_ge[0] counts every street cell.
  field.n_ge.assign(max_count + 1, 0);
  field.n_ge[0] = s.n_road;
  for (const Cell& c : s.streets) {
    const int cnt = field.counts[s.cell_index(c)];
    for (int n = 1; n <= cnt; ++n) ++field.n_ge[n];
  }
  return field;
}

int cells_in_range(Cell pos, const Scenario& s) {
  const double r2 = s.sensor.range_m * s.sensor.range_m;
  int count = 0;
  for (const Cell& c : s.streets) {
    const double dx = (c.x - pos.x) * s.grid_len;
    const double dy = (c.y - pos.y) * s.grid_len;
    if (dx * dx + dy * dy <= r2) ++count;
  }
  return count;
}

// ---------------------------------------------------------------------------

VisibilityCache::VisibilityCache(const Scenario& s) : scn_(&s) {
  const double r2 = s.sensor.range_m * s.sensor.range_m;
  in_range_.resize(s.tags.size());
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      std::vector<InRange>& list = in_range_[y * s.width + x];
      for (const Cell& c : s.streets) {
        const double dx = (c.x - x) * s.grid_len;
        const double dy = (c.y - y) * s.grid_len;
        if (dx * dx + dy * dy > r2) continue;
        if (c.x == x && c.y == y) continue;
        list.push_back(InRange{std::atan2(static_cast<double>(c.y - y),
                                          static_cast<double>(c.x - x)),
                               s.cell_index(c)});
      }
      std::sort(list.begin(), list.end(), [](const InRange& a, const InRange& b) {
        if (a.angle != b.angle) return a.angle < b.angle;
        return a.cell_idx < b.cell_idx;
      });
    }
  }
}

LosCache::LosCache(const Scenario& s, const OcclusionMask& mask) : scn_(&s), mask_(&mask) {
  n_ = s.tags.size();
  if (n_ <= kMaxMemoCells) {
    memo_ = std::make_unique<std::atomic<std::uint8_t>[]>(n_ * n_);
    for (std::size_t i = 0; i < n_ * n_; ++i)
      memo_[i].store(0, std::memory_order_relaxed);
  }
}

bool LosCache::line_of_sight(Cell a, Cell b) const {
  if (!memo_) return roadcover::line_of_sight(*scn_, *mask_, a, b);
  // The visited cell set is symmetric in the endpoints; canonicalize.
  std::size_t ia = static_cast<std::size_t>(scn_->cell_index(a));
  std::size_t ib = static_cast<std::size_t>(scn_->cell_index(b));
  if (ia > ib) std::swap(ia, ib);
  std::atomic<std::uint8_t>& slot = memo_[ia * n_ + ib];
  const std::uint8_t cached = slot.load(std::memory_order_relaxed);
  if (cached != 0) return cached == 2;
  const bool clear = roadcover::line_of_sight(*scn_, *mask_, a, b);
  slot.store(clear ? 2 : 1, std::memory_order_relaxed);
  return clear;
}

std::vector<int> covered_street_cells(const Gene& g, const VisibilityCache& vis,
                                      const LosCache& los) {
  const Scenario& s = vis.scenario();
  const double half_fov = s.sensor.fov_rad * 0.5;
  std::vector<int> out;
  for (const VisibilityCache::InRange& e : vis.in_range(g.cell())) {
    if (ang_dist(e.angle, g.phi) > half_fov) continue;
    if (!los.line_of_sight(g.cell(), s.cell_at(e.cell_idx))) continue;
    out.push_back(e.cell_idx);
  }
  return out;
}

std::vector<int> covered_street_cells(const Gene& g, const Scenario& s,
                                      const OcclusionMask& mask, const LosCache* los) {
  const double r2 = s.sensor.range_m * s.sensor.range_m;
  const double half_fov = s.sensor.fov_rad * 0.5;
  std::vector<int> out;
  for (const Cell& c : s.streets) {
    const double dx = (c.x - g.x) * s.grid_len;
    const double dy = (c.y - g.y) * s.grid_len;
    if (dx * dx + dy * dy > r2) continue;
    const double a = std::atan2(static_cast<double>(c.y - g.y),
                                static_cast<double>(c.x - g.x));
    if (ang_dist(a, g.phi) > half_fov) continue;
    const bool clear =
        los ? los->line_of_sight(g.cell(), c) : line_of_sight(s, mask, g.cell(), c);
    if (clear) out.push_back(s.cell_index(c));
  }
  return out;
}

}  // namespace roadcover
