#include "roadcover/fitness.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace roadcover {

FitnessWeights default_weights(int n_road) {
  if (n_road < 1) throw std::invalid_argument("empty street set");
  FitnessWeights w;
  w.alpha = 2.0 * n_road;
  w.beta = 2.0 * n_road - 1.0;
  w.gamma = static_cast<double>(n_road);
  w.delta = 1.0;
  if (!w.valid())
    throw std::invalid_argument(
        "default weights violate alpha > gamma > delta; needs n_road >= 2");
  return w;
}

double fitness_from_tails(const std::vector<int>& n_ge, int n_prio, int n_sens,
                          const FitnessWeights& w) {
  double overlap = 0.0;
  for (int n = 2; n < static_cast<int>(n_ge.size()); ++n)
    overlap += static_cast<double>(n_ge[n]) / (n - 1);
  const int covered = n_ge.size() > 1 ? n_ge[1] : 0;
  return w.alpha * covered + w.beta * n_prio - w.gamma * n_sens + w.delta * overlap;
}

namespace {

int priority_satisfied(const CoverageField& field, const Scenario& s) {
  int n = 0;
  for (const Cell& c : s.streets)
    if (s.is_priority(c) && field.counts[s.cell_index(c)] >= 2) ++n;
  return n;
}

}  // namespace

double evaluate_fitness(std::span<const Gene> genes, const Scenario& s,
                        const FitnessWeights& w, std::span<const OcclusionMask> masks) {
  if (masks.empty()) throw std::invalid_argument("evaluate_fitness requires masks");
  double sum = 0.0;
  for (const OcclusionMask& mask : masks) {
    const CoverageField field = coverage_counts(genes, s, mask);
    sum += fitness_from_tails(field.n_ge, priority_satisfied(field, s),
                              static_cast<int>(genes.size()), w);
  }
  return sum / static_cast<double>(masks.size());
}

CoverageMetrics coverage_metrics(std::span<const Gene> genes, const Scenario& s,
                                 std::span<const OcclusionMask> masks) {
  if (s.n_road < 1) throw std::invalid_argument("coverage metrics need street cells");
  if (masks.empty()) throw std::invalid_argument("coverage_metrics requires masks");
  CoverageMetrics m;
  m.n_sens = static_cast<int>(genes.size());
  double c_sum = 0.0;
  for (const OcclusionMask& mask : masks) {
    const CoverageField field = coverage_counts(genes, s, mask);
    c_sum += static_cast<double>(field.n_cov(1)) / field.n_cov(0);
  }
  m.c = c_sum / static_cast<double>(masks.size());
  if (m.n_sens > 0) {
    const double wedge_area = s.sensor.range_m * s.sensor.range_m * s.sensor.fov_rad * 0.5;
    m.c_eff = (s.n_road * s.grid_len * s.grid_len) / (m.n_sens * wedge_area);
  }
  return m;
}

double evaluate_fitness_cached(std::span<const Gene> genes, const VisibilityCache& vis,
                               const FitnessWeights& w, const MaskSet& masks) {
  const Scenario& s = vis.scenario();
  double sum = 0.0;
  std::vector<std::uint16_t> count(s.tags.size());
  for (std::size_t mi = 0; mi < masks.size(); ++mi) {
    std::fill(count.begin(), count.end(), 0);
    int max_count = 0;
    for (const Gene& g : genes) {
      for (int idx : covered_street_cells(g, vis, masks.los[mi])) {
        ++count[idx];
        max_count = std::max(max_count, static_cast<int>(count[idx]));
      }
    }
    std::vector<int> n_ge(max_count + 1, 0);
    n_ge[0] = s.n_road;
    int prio = 0;
    for (const Cell& c : s.streets) {
      const int cnt = count[s.cell_index(c)];
      for (int n = 1; n <= cnt; ++n) ++n_ge[n];
      if (s.is_priority(c) && cnt >= 2) ++prio;
    }
    sum += fitness_from_tails(n_ge, prio, static_cast<int>(genes.size()), w);
  }
  return sum / static_cast<double>(masks.size());
}

// ---------------------------------------------------------------------------

Evaluator::Evaluator(const VisibilityCache& vis, const FitnessWeights& w, const MaskSet& masks)
    : vis_(&vis), w_(w), masks_(&masks) {
  const Scenario& s = vis.scenario();
  state_.resize(masks.size());
  for (MaskState& st : state_) {
    st.count.assign(s.tags.size(), 0);
    st.n_ge.assign(1, s.n_road);
  }
}

const std::vector<std::vector<int>>& Evaluator::coverage_of(const Gene& g) {
  std::uint64_t phi_bits;
  static_assert(sizeof(phi_bits) == sizeof(g.phi));
  std::memcpy(&phi_bits, &g.phi, sizeof(phi_bits));
  const std::uint64_t k = mix64(static_cast<std::uint64_t>(key(g.cell()))) ^ phi_bits;
  auto it = pose_cache_.find(k);
  if (it != pose_cache_.end()) return it->second;
  std::vector<std::vector<int>> covered(masks_->size());
  for (std::size_t mi = 0; mi < masks_->size(); ++mi)
    covered[mi] = covered_street_cells(g, *vis_, masks_->los[mi]);
  return pose_cache_.emplace(k, std::move(covered)).first->second;
}

void Evaluator::apply(const std::vector<std::vector<int>>& covered, int delta) {
  const Scenario& s = vis_->scenario();
  for (std::size_t mi = 0; mi < covered.size(); ++mi) {
    MaskState& st = state_[mi];
    for (int idx : covered[mi]) {
      if (delta > 0) {
        const int now = ++st.count[idx];
        if (static_cast<int>(st.n_ge.size()) <= now) st.n_ge.resize(now + 1, 0);
        ++st.n_ge[now];
        if (now == 2 && s.priority_map[idx]) ++st.prio_ok;
      } else {
        const int was = st.count[idx]--;
        --st.n_ge[was];
        if (was == 2 && s.priority_map[idx]) --st.prio_ok;
      }
    }
  }
}

void Evaluator::add(const Gene& g) {
  const int k = key(g.cell());
  if (genes_.count(k)) throw std::logic_error("evaluator: position already occupied");
  const auto& covered = coverage_of(g);
  apply(covered, +1);
  genes_.emplace(k, Placed{g.phi, covered});
}

void Evaluator::remove(const Gene& g) {
  auto it = genes_.find(key(g.cell()));
  if (it == genes_.end()) throw std::logic_error("evaluator: gene not present");
  apply(it->second.covered, -1);
  genes_.erase(it);
}

std::vector<Gene> Evaluator::genes() const {
  std::vector<Gene> out;
  out.reserve(genes_.size());
  const Scenario& s = vis_->scenario();
  for (const auto& [k, placed] : genes_) {
    const Cell c = s.cell_at(k);
    out.push_back(Gene{c.x, c.y, placed.phi});
  }
  std::sort(out.begin(), out.end(), gene_lex_less);
  return out;
}

double Evaluator::fitness() const {
  double sum = 0.0;
  for (const MaskState& st : state_)
    sum += fitness_from_tails(st.n_ge, st.prio_ok, sensor_count(), w_);
  return sum / static_cast<double>(state_.size());
}

int Evaluator::covered_at_least(int mask_i, int n) const {
  const MaskState& st = state_[mask_i];
  if (n < 0) return 0;
  return n < static_cast<int>(st.n_ge.size()) ? st.n_ge[n] : 0;
}

CoverageMetrics Evaluator::metrics() const {
  const Scenario& s = vis_->scenario();
  CoverageMetrics m;
  m.n_sens = sensor_count();
  double c_sum = 0.0;
  for (std::size_t mi = 0; mi < state_.size(); ++mi)
    c_sum += static_cast<double>(covered_at_least(static_cast<int>(mi), 1)) / s.n_road;
  m.c = c_sum / static_cast<double>(state_.size());
  if (m.n_sens > 0) {
    const double wedge_area = s.sensor.range_m * s.sensor.range_m * s.sensor.fov_rad * 0.5;
    m.c_eff = (s.n_road * s.grid_len * s.grid_len) / (m.n_sens * wedge_area);
  }
  return m;
}

}  // namespace roadcover
