#include <algorithm>
#include <set>

#include "doctest.h"
#include "test_support.hpp"

using namespace roadcover;
using namespace testsupport;

TEST_CASE("candidate angles for axis-aligned street cells") {
  SUBCASE("single street cell dead ahead") {
    const Scenario s = make_scenario({"..S"}, 1.0, 5.0, 90.0);
    const auto angles = candidate_angles(Cell{0, 0}, s);
    REQUIRE(angles.size() == 1);
    CHECK(angles[0] == doctest::Approx(0.0));
  }
  SUBCASE("cells at (2,0) and (0,2) give 0 and pi/2, sorted") {
    const Scenario s = make_scenario({"..S", "...", "S.."}, 1.0, 9.0, 90.0);
    const auto angles = candidate_angles(Cell{0, 0}, s);
    REQUIRE(angles.size() == 2);
    CHECK(angles[0] == doctest::Approx(0.0));
    CHECK(angles[1] == doctest::Approx(kPi / 2.0));
  }
  SUBCASE("no street cells -> empty list") {
    const Scenario s = make_scenario({"..", ".."}, 1.0, 5.0, 90.0);
    CHECK(candidate_angles(Cell{0, 0}, s).empty());
  }
}

TEST_CASE("candidate angle count matches a brute-force enumeration oracle") {
  RngStream rng(501);
  for (int trial = 0; trial < 10; ++trial) {
    const Scenario s = random_scenario(rng, 12, 12, 0.15, 0.3, 20.0, 40.0);
    const Cell pos{0, 0};
    // Oracle: pairwise-distinct angles by tolerance, via a double loop.
    std::vector<double> raw;
    for (const Cell& c : s.streets) {
      if (c == pos) continue;
      raw.push_back(std::atan2(double(c.y - pos.y), double(c.x - pos.x)));
    }
    std::sort(raw.begin(), raw.end());
    int distinct = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      bool duplicate = i > 0 && raw[i] - raw[i - 1] <= 1e-9;
      if (i + 1 == raw.size() && !raw.empty() && distinct > 0 &&
          (raw[0] + kTwoPi) - raw[i] <= 1e-9)
        duplicate = true;
      if (!duplicate) ++distinct;
    }
    CHECK(static_cast<int>(candidate_angles(pos, s).size()) == distinct);
  }
}

TEST_CASE("line of sight basics") {
  const Scenario open = make_scenario({"SSSSS"}, 1.0, 10.0, 90.0);
  CHECK(line_of_sight(open, empty_mask(open), Cell{0, 0}, Cell{4, 0}));

  const Scenario blocked = make_scenario({"SS#SS"}, 1.0, 10.0, 90.0);
  CHECK(!line_of_sight(blocked, empty_mask(blocked), Cell{0, 0}, Cell{4, 0}));
  CHECK(line_of_sight(blocked, empty_mask(blocked), Cell{0, 0}, Cell{1, 0}));

  // Endpoint cells never block: looking at an obstacle-adjacent cell is fine,
  // and a mask-opaque target is itself still visible.
  const Scenario s = make_scenario({"SSS"}, 1.0, 10.0, 90.0, {{1, 0, 1.0}});
  const auto masks = sample_occlusion_masks(s, 5, 1);
  CHECK(!line_of_sight(s, masks[0], Cell{0, 0}, Cell{2, 0}));
  CHECK(line_of_sight(s, masks[0], Cell{0, 0}, Cell{1, 0}));
}

TEST_CASE("supercover traversal equals the exact segment-square oracle") {
  RngStream rng(88);
  for (int trial = 0; trial < 400; ++trial) {
    const Cell a{rng.uniform_int(0, 19), rng.uniform_int(0, 19)};
    const Cell b{rng.uniform_int(0, 19), rng.uniform_int(0, 19)};
    std::set<std::pair<int, int>> visited;
    supercover_visit(a, b, [&](Cell c) {
      visited.insert({c.x, c.y});
      return true;
    });
    std::set<std::pair<int, int>> expected;
    for (const Cell& c : segment_cells_oracle(a, b)) expected.insert({c.x, c.y});
    REQUIRE(visited == expected);
  }
}

TEST_CASE("line_of_sight agrees with the geometric oracle on random maps") {
  RngStream rng(1234);
  for (int trial = 0; trial < 100; ++trial) {
    const Scenario s = random_scenario(rng, 20, 20, 0.18, 0.25, 25.0, 120.0);
    const auto masks = sample_occlusion_masks(s, trial, 1);
    for (int pair = 0; pair < 60; ++pair) {
      const Cell a{rng.uniform_int(0, 19), rng.uniform_int(0, 19)};
      const Cell b{rng.uniform_int(0, 19), rng.uniform_int(0, 19)};
      CHECK(line_of_sight(s, masks[0], a, b) == los_oracle(s, masks[0], a, b));
    }
  }
}

TEST_CASE("covers: wedge, range and blockage") {
  // Sensor at the west end of a street row, r=5m, fov=90 deg.
  const Scenario s = make_scenario({".SSSSSSS"}, 1.0, 5.0, 90.0);
  const Gene east{0, 0, 0.0};
  CHECK(covers(east, Cell{2, 0}, s, empty_mask(s)));
  CHECK(covers(east, Cell{5, 0}, s, empty_mask(s)));   // 5m: range boundary inclusive
  CHECK(!covers(east, Cell{6, 0}, s, empty_mask(s)));  // r + half a cell: out of range

  const Scenario s2 = make_scenario({"S.S"}, 1.0, 5.0, 90.0);
  const Gene g{1, 0, 0.0};
  CHECK(covers(g, Cell{2, 0}, s2, empty_mask(s2)));
  CHECK(!covers(g, Cell{0, 0}, s2, empty_mask(s2)));  // directly behind

  // FoV boundary inclusive: cell exactly at +45 deg with fov 90.
  const Scenario s3 = make_scenario({".S", ".S"}, 1.0, 5.0, 90.0);
  const Gene diag{0, 0, 0.0};
  CHECK(covers(diag, Cell{1, 1}, s3, empty_mask(s3)));
}

TEST_CASE("mask monotonicity: removing opaque cells never removes coverage") {
  RngStream rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    Scenario s = random_scenario(rng, 14, 14, 0.1, 0.3, 12.0, 100.0);
    for (const Cell& c : s.streets)
      if (rng.bernoulli(0.3)) s.opacity.push_back({c, 0.5});
    finalize_scenario(s);
    const auto m2v = sample_occlusion_masks(s, trial, 1);
    const OcclusionMask& m2 = m2v[0];
    // m1: subset of m2's opaque cells.
    OcclusionMask m1 = empty_mask(s);
    for (const Cell& c : m2.opaque_now)
      if (rng.bernoulli(0.5)) {
        m1.opaque_now.push_back(c);
        m1.opaque_map[s.cell_index(c)] = 1;
      }
    const auto genes = random_genes(rng, s, 4);
    for (const Gene& g : genes)
      for (const Cell& c : s.streets)
        if (covers(g, c, s, m2)) CHECK(covers(g, c, s, m1));
  }
}

TEST_CASE("coverage_counts") {
  const Scenario s = make_scenario({".SSS", "...."}, 1.0, 6.0, 180.0);

  SUBCASE("no sensors: all counts zero") {
    const CoverageField f = coverage_counts({}, s, empty_mask(s));
    CHECK(f.n_cov(0) == 3);
    CHECK(f.n_cov(1) == 0);
  }
  SUBCASE("two genes at different cells, same wedge: counts double") {
    const std::vector<Gene> genes = {Gene{0, 0, 0.0}, Gene{0, 1, 0.0}};
    // Second gene sees the street row diagonally; verify against the oracle.
    const CoverageField f = coverage_counts(genes, s, empty_mask(s));
    const auto oracle = coverage_oracle(genes, s, empty_mask(s));
    for (const Cell& c : s.streets)
      CHECK(f.counts[s.cell_index(c)] == oracle.at({c.x, c.y}));
  }
  SUBCASE("random instances match the per-pair oracle") {
    RngStream rng(4242);
    for (int trial = 0; trial < 40; ++trial) {
      const Scenario rs = random_scenario(rng, 12, 12, 0.12, 0.3, 9.0, 70.0);
      const auto masks = sample_occlusion_masks(rs, trial, 1);
      const auto genes = random_genes(rng, rs, 5);
      const CoverageField f = coverage_counts(genes, rs, masks[0]);
      const auto oracle = coverage_oracle(genes, rs, masks[0]);
      int max_count = 0;
      for (const Cell& c : rs.streets) {
        CHECK(f.counts[rs.cell_index(c)] == oracle.at({c.x, c.y}));
        max_count = std::max(max_count, oracle.at({c.x, c.y}));
      }
      // n_cov tails: non-increasing and consistent with the counts.
      CHECK(f.n_cov(0) == rs.n_road);
      for (int n = 1; n <= max_count + 1; ++n) {
        CHECK(f.n_cov(n) <= f.n_cov(n - 1));
        int expect = 0;
        for (const auto& [cell, cnt] : oracle)
          if (cnt >= n) ++expect;
        CHECK(f.n_cov(n) == expect);
      }
    }
  }
}

TEST_CASE("identical wedges at the same pose double the count") {
  const Scenario s = make_scenario({".SSS"}, 1.0, 6.0, 90.0);
  const std::vector<Gene> twice = {Gene{0, 0, 0.0}, Gene{0, 0, 0.0}};
  const CoverageField f = coverage_counts(twice, s, empty_mask(s));
  for (const Cell& c : s.streets) CHECK(f.counts[s.cell_index(c)] == 2);
  CHECK(f.n_cov(2) == 3);
}

TEST_CASE("cells_in_range") {
  const Scenario far = make_scenario({"S....", ".....", "....."}, 1.0, 2.0, 90.0);
  CHECK(cells_in_range(Cell{4, 2}, far) == 0);

  const Scenario near = make_scenario({"S."}, 1.0, 2.0, 90.0);
  CHECK(cells_in_range(Cell{1, 0}, near) == 1);

  RngStream rng(9);
  const Scenario s = random_scenario(rng, 15, 15, 0.1, 0.3, 5.0, 90.0);
  for (int i = 0; i < 20; ++i) {
    const Cell pos{rng.uniform_int(0, 14), rng.uniform_int(0, 14)};
    int expect = 0;
    for (const Cell& c : s.streets)
      if (s.center_dist(pos, c) <= s.sensor.range_m) ++expect;
    CHECK(cells_in_range(pos, s) == expect);
  }
}

TEST_CASE("visibility caches agree with the uncached kernel") {
  RngStream rng(31);
  for (int trial = 0; trial < 15; ++trial) {
    const Scenario s = random_scenario(rng, 13, 13, 0.15, 0.3, 8.0, 120.0);
    const auto masks = sample_occlusion_masks(s, trial, 2);
    const VisibilityCache vis(s);
    const LosCache los(s, masks[0]);
    for (const Gene& g : random_genes(rng, s, 6)) {
      std::vector<int> expect;
      for (const Cell& c : s.streets)
        if (covers(g, c, s, masks[0])) expect.push_back(s.cell_index(c));
      std::vector<int> got = covered_street_cells(g, vis, los);
      std::sort(got.begin(), got.end());
      std::sort(expect.begin(), expect.end());
      CHECK(got == expect);
      std::vector<int> direct = covered_street_cells(g, s, masks[0]);
      std::sort(direct.begin(), direct.end());
      CHECK(direct == expect);
      CHECK(vis.cells_in_range(g.cell()) == cells_in_range(g.cell(), s));
    }
  }
}
