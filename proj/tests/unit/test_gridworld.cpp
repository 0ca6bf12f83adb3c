#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"

using namespace roadcover;
using namespace testsupport;

TEST_CASE("parse_scenario on a minimal map") {
  const Scenario s = make_scenario({".S."}, 1.0, 5.0, 90.0);
  CHECK(s.width == 3);
  CHECK(s.height == 1);
  CHECK(s.n_road == 1);
  REQUIRE(s.streets.size() == 1);
  CHECK(s.streets[0] == Cell{1, 0});
  CHECK(s.frees.size() == 2);
  CHECK(s.sensor.fov_rad == doctest::Approx(kPi / 2.0));
}

TEST_CASE("priority cells come from 'P' characters") {
  const Scenario s = make_scenario({"SPS", "..."}, 1.0, 5.0, 90.0);
  CHECK(s.n_road == 3);
  CHECK(s.is_priority(Cell{1, 0}));
  CHECK(!s.is_priority(Cell{0, 0}));
  const ScenarioStats st = scenario_stats(s);
  CHECK(st.n_priority == 1);
  CHECK(st.n_road == 3);
  CHECK(st.n_free == 3);
}

TEST_CASE("opacity on a non-street cell is rejected") {
  const std::string doc = scenario_doc({"S..", "..."}, 1.0, 5.0, 90.0, {{1, 1, 0.5}});
  CHECK_THROWS_WITH_AS(parse_scenario(doc), doctest::Contains("non-street"), ScenarioError);
}

TEST_CASE("parse errors: rows, characters, header") {
  CHECK_THROWS_AS(parse_scenario(scenario_doc({"SS", "S"}, 1, 5, 90)), ScenarioError);
  CHECK_THROWS_AS(parse_scenario("grid_len=1\nsensor_range=5\nsensor_fov_deg=90\n\nSX\n"),
                  ScenarioError);
  CHECK_THROWS_AS(parse_scenario("grid_len=1\n\nS.\n"), ScenarioError);  // no sensor spec
  CHECK_THROWS_AS(parse_scenario(scenario_doc({"S."}, 1, 5, 90, {{0, 0, 1.5}})), ScenarioError);
}

TEST_CASE("serialize/parse round trip preserves every field") {
  RngStream rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    Scenario s = random_scenario(rng, 3 + rng.uniform_int(0, 12), 3 + rng.uniform_int(0, 12),
                                 0.2, 0.3, 4.0 + rng.uniform01() * 30.0,
                                 10.0 + rng.uniform01() * 350.0);
    // Decorate with priority and opacity on some street cells.
    int k = 0;
    for (const Cell& c : s.streets) {
      if (k % 3 == 0) s.priority_map[s.cell_index(c)] = 1;
      if (k % 4 == 1) s.opacity.push_back({c, rng.uniform01()});
      ++k;
    }
    finalize_scenario(s);
    const Scenario back = parse_scenario(serialize_scenario(s));
    CHECK(back == s);
  }
}

TEST_CASE("occlusion masks: empty, certain, and reproducible") {
  SUBCASE("no opacity entries -> empty masks") {
    const Scenario s = make_scenario({"SS", ".."}, 1.0, 5.0, 90.0);
    for (const OcclusionMask& m : sample_occlusion_masks(s, 7, 5))
      CHECK(m.opaque_now.empty());
  }
  SUBCASE("opacity 1.0 -> opaque in every mask") {
    const Scenario s = make_scenario({"SS", ".."}, 1.0, 5.0, 90.0, {{0, 0, 1.0}});
    for (const OcclusionMask& m : sample_occlusion_masks(s, 7, 20)) {
      REQUIRE(m.opaque_now.size() == 1);
      CHECK(m.opaque_now[0] == Cell{0, 0});
    }
  }
  SUBCASE("bit-identical across calls") {
    const Scenario s =
        make_scenario({"SSS", "..."}, 1.0, 5.0, 90.0, {{0, 0, 0.3}, {1, 0, 0.7}, {2, 0, 0.5}});
    const auto a = sample_occlusion_masks(s, 99, 16);
    const auto b = sample_occlusion_masks(s, 99, 16);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].opaque_now == b[i].opaque_now);
      CHECK(a[i].opaque_map == b[i].opaque_map);
    }
  }
}

TEST_CASE("mask sampling matches the configured opacity") {
  const double p = 0.8;
  const Scenario s = make_scenario({"SS", ".."}, 1.0, 5.0, 90.0, {{0, 0, p}, {1, 0, 0.25}});
  const int m_count = 10000;
  const auto masks = sample_occlusion_masks(s, 123, m_count);
  int hits_a = 0, hits_b = 0;
  for (const OcclusionMask& m : masks) {
    hits_a += m.is_opaque(s.cell_index({0, 0})) ? 1 : 0;
    hits_b += m.is_opaque(s.cell_index({1, 0})) ? 1 : 0;
  }
  const double frac_a = hits_a / static_cast<double>(m_count);
  const double frac_b = hits_b / static_cast<double>(m_count);
  CHECK(frac_a == doctest::Approx(p).epsilon(0.025));
  // 3 standard errors of a Bernoulli mean.
  CHECK(std::abs(frac_b - 0.25) <= 3.0 * std::sqrt(0.25 * 0.75 / m_count));
}

TEST_CASE("stats of tiny and empty-street maps") {
  const Scenario s = make_scenario({".S."}, 1.0, 5.0, 90.0);
  const ScenarioStats st = scenario_stats(s);
  CHECK(st.n_road == 1);
  CHECK(st.n_free == 2);

  const Scenario empty = make_scenario({"..", "#B"}, 1.0, 5.0, 90.0);
  CHECK(scenario_stats(empty).n_road == 0);
  CHECK(empty.n_road == 0);
}

TEST_CASE("intersection fixture street count matches an independent file scan") {
  std::ifstream in(std::string(FIXTURES_DIR) + "/intersection.scn");
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  int streets_in_file = 0;
  bool in_grid = false;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.find_first_not_of("#BSP.") == std::string::npos) in_grid = true;
    if (in_grid)
      for (char ch : line)
        if (ch == 'S' || ch == 'P') ++streets_in_file;
  }
  const Scenario s = parse_scenario(text);
  CHECK(s.n_road == streets_in_file);
  CHECK(s.n_road == 371);  // 2 crossing 7-cell-wide arms on a 30x30 grid
}
