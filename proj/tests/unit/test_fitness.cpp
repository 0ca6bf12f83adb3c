#include <cmath>

#include "doctest.h"
#include "test_support.hpp"

using namespace roadcover;
using namespace testsupport;

TEST_CASE("default weights") {
  SUBCASE("n_road=100 gives (200, 199, 100, 1)") {
    const FitnessWeights w = default_weights(100);
    CHECK(w.alpha == 200.0);
    CHECK(w.beta == 199.0);
    CHECK(w.gamma == 100.0);
    CHECK(w.delta == 1.0);
    CHECK(w.valid());
  }
  SUBCASE("n_road=0 and n_road=1 are rejected") {
    CHECK_THROWS_WITH_AS(default_weights(0), doctest::Contains("empty street set"),
                         std::invalid_argument);
    // (2, 1, 1, 1) violates gamma > delta.
    CHECK_THROWS_AS(default_weights(1), std::invalid_argument);
  }
  SUBCASE("constructed instances satisfy the boundary conditions") {
    for (int n : {2, 3, 10, 371, 5000}) {
      const FitnessWeights w = default_weights(n);
      CHECK(w.beta == w.alpha - w.delta);
      CHECK(w.alpha > w.gamma);
      CHECK(w.gamma > w.delta);
    }
  }
}

TEST_CASE("fitness of simple configurations") {
  const Scenario s = make_scenario({".SSSS"}, 1.0, 10.0, 90.0);
  const FitnessWeights w = default_weights(s.n_road);
  const auto masks = sample_occlusion_masks(s, 1, 2);

  SUBCASE("empty placement scores zero") {
    CHECK(evaluate_fitness({}, s, w, masks) == 0.0);
  }
  SUBCASE("one sensor covering k cells, no overlap: alpha*k - gamma") {
    const std::vector<Gene> genes = {Gene{0, 0, 0.0}};
    CHECK(evaluate_fitness(genes, s, w, masks) == doctest::Approx(w.alpha * 4 - w.gamma));
  }
}

TEST_CASE("fitness equals the literal formula oracle on random instances") {
  RngStream rng(2718);
  for (int trial = 0; trial < 60; ++trial) {
    Scenario s = random_scenario(rng, 10, 10, 0.1, 0.35, 7.0, 110.0);
    int k = 0;
    for (const Cell& c : s.streets) {
      if (k % 5 == 0) s.priority_map[s.cell_index(c)] = 1;
      if (k % 4 == 2) s.opacity.push_back({c, 0.5});
      ++k;
    }
    finalize_scenario(s);
    const auto masks = sample_occlusion_masks(s, trial, 3);
    const FitnessWeights w = default_weights(s.n_road);
    const auto genes = random_genes(rng, s, rng.uniform_int(0, 6));

    const double expect = fitness_formula_oracle(genes, s, w, masks);
    const double got = evaluate_fitness(genes, s, w, masks);
    if (expect == 0.0) {
      CHECK(got == 0.0);
    } else {
      CHECK(got == doctest::Approx(expect).epsilon(1e-9));
    }

    // Cached paths must agree bit-for-bit with the plain path.
    const VisibilityCache vis(s);
    const MaskSet mask_set(s, masks);
    CHECK(evaluate_fitness_cached(genes, vis, w, mask_set) == got);
    Evaluator ev(vis, w, mask_set);
    for (const Gene& g : genes) ev.add(g);
    CHECK(ev.fitness() == got);
  }
}

TEST_CASE("a redundant sensor costs exactly gamma") {
  // True redundancy: a sensor with every street cell out of range covers
  // nothing and contributes no overlap, whatever its orientation.
  const Scenario s = make_scenario({".SSS...........", "..............."}, 1.0, 6.0, 90.0);
  const FitnessWeights w = default_weights(s.n_road);
  const auto masks = sample_occlusion_masks(s, 3, 1);
  const std::vector<Gene> base = {Gene{0, 0, 0.0}};
  std::vector<Gene> with_dead = base;
  const Cell far{14, 1};
  with_dead.push_back(Gene{far.x, far.y, nearest_candidate_angle(far, kPi, s)});
  REQUIRE(cells_in_range(far, s) == 0);
  const double f0 = evaluate_fitness(base, s, w, masks);
  const double f1 = evaluate_fitness(with_dead, s, w, masks);
  CHECK(f0 - f1 == doctest::Approx(w.gamma));
}

TEST_CASE("adding a gene never decreases N_cov(1) or N_prio") {
  RngStream rng(515);
  for (int trial = 0; trial < 20; ++trial) {
    Scenario s = random_scenario(rng, 10, 10, 0.1, 0.3, 8.0, 100.0);
    int k = 0;
    for (const Cell& c : s.streets)
      if (k++ % 3 == 0) s.priority_map[s.cell_index(c)] = 1;
    finalize_scenario(s);
    const auto masks = sample_occlusion_masks(s, trial, 1);
    auto genes = random_genes(rng, s, 4);
    if (genes.empty()) continue;
    const Gene extra = genes.back();
    genes.pop_back();

    const CoverageField before = coverage_counts(genes, s, masks[0]);
    auto more = genes;
    more.push_back(extra);
    const CoverageField after = coverage_counts(more, s, masks[0]);
    CHECK(after.n_cov(1) >= before.n_cov(1));
    int prio_before = 0, prio_after = 0;
    for (const Cell& c : s.streets) {
      if (!s.is_priority(c)) continue;
      prio_before += before.counts[s.cell_index(c)] >= 2 ? 1 : 0;
      prio_after += after.counts[s.cell_index(c)] >= 2 ? 1 : 0;
    }
    CHECK(prio_after >= prio_before);
  }
}

TEST_CASE("coverage metrics") {
  const Scenario s = make_scenario({".SS"}, 1.0, 10.0, 90.0);
  const auto masks = sample_occlusion_masks(s, 1, 1);

  SUBCASE("full coverage has c = 1") {
    const std::vector<Gene> genes = {Gene{0, 0, 0.0}};
    const CoverageMetrics m = coverage_metrics(genes, s, masks);
    CHECK(m.c == 1.0);
    CHECK(m.n_sens == 1);
  }
  SUBCASE("no sensors: c computed, c_eff absent") {
    const CoverageMetrics m = coverage_metrics({}, s, masks);
    CHECK(m.c == 0.0);
    CHECK(!m.c_eff.has_value());
  }
}

TEST_CASE("c_eff formula: 1 sensor, r=20, fov=40deg, 100 street cells") {
  // One long street row of 100 cells; sensor coverage is irrelevant to c_eff.
  std::string row(100, 'S');
  const Scenario s = make_scenario({row, std::string(100, '.')}, 1.0, 20.0, 40.0);
  REQUIRE(s.n_road == 100);
  const auto masks = sample_occlusion_masks(s, 1, 1);
  const std::vector<Gene> genes = {Gene{0, 1, 0.0}};
  const CoverageMetrics m = coverage_metrics(genes, s, masks);
  REQUIRE(m.c_eff.has_value());
  const double fov = 40.0 * kPi / 180.0;
  CHECK(*m.c_eff == doctest::Approx(100.0 / (400.0 * fov / 2.0)));
  CHECK(*m.c_eff == doctest::Approx(0.716).epsilon(1e-3));
}

TEST_CASE("c_eff is inversely proportional to the sensor count") {
  std::string row(60, 'S');
  const Scenario s = make_scenario({row, std::string(60, '.')}, 1.0, 15.0, 60.0);
  const auto masks = sample_occlusion_masks(s, 1, 1);
  std::vector<Gene> genes;
  for (int i = 0; i < 4; ++i) genes.push_back(Gene{i * 10, 1, 0.0});
  const CoverageMetrics m4 = coverage_metrics(genes, s, masks);
  for (int i = 0; i < 4; ++i) genes.push_back(Gene{i * 10 + 5, 1, 0.0});
  const CoverageMetrics m8 = coverage_metrics(genes, s, masks);
  CHECK(*m4.c_eff == 2.0 * *m8.c_eff);
}

TEST_CASE("evaluator add/remove round trip is exact") {
  RngStream rng(808);
  const Scenario s = random_scenario(rng, 12, 12, 0.1, 0.3, 9.0, 100.0);
  const FitnessWeights w = default_weights(s.n_road);
  const VisibilityCache vis(s);
  const MaskSet masks(s, sample_occlusion_masks(s, 4, 3));
  Evaluator ev(vis, w, masks);
  const auto genes = random_genes(rng, s, 6);
  for (const Gene& g : genes) ev.add(g);
  const double f0 = ev.fitness();
  // Remove and re-add each gene; the state must come back exactly.
  for (const Gene& g : genes) {
    ev.remove(g);
    ev.add(g);
  }
  CHECK(ev.fitness() == f0);
  CHECK(ev.sensor_count() == static_cast<int>(genes.size()));
  const CoverageMetrics m = ev.metrics();
  CHECK(m.c == coverage_metrics(genes, s, masks.masks).c);
}
