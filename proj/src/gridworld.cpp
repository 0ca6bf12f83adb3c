#include "roadcover/gridworld.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include "roadcover/rng.hpp"

namespace roadcover {

namespace {

constexpr std::uint64_t kMaskStreamTag = 0x6d61736b;  // "mask"

const char* kGridChars = "#BSP.";

bool is_grid_line(const std::string& line) {
  if (line.empty()) return false;
  return line.find_first_not_of(kGridChars) == std::string::npos;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ScenarioError("invalid number for " + what + ": '" + s + "'");
  }
  if (pos != s.size()) throw ScenarioError("invalid number for " + what + ": '" + s + "'");
  return v;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void finalize_scenario(Scenario& s) {
  if (s.width <= 0 || s.height <= 0) throw ScenarioError("empty grid");
  const std::size_t n = static_cast<std::size_t>(s.width) * s.height;
  if (s.tags.size() != n) throw ScenarioError("tag array does not match grid dimensions");
  if (s.priority_map.size() != n) s.priority_map.assign(n, 0);
  if (s.sensor.range_m <= 0.0) throw ScenarioError("missing sensor spec: sensor_range");
  if (s.sensor.fov_rad <= 0.0 || s.sensor.fov_rad > kTwoPi + 1e-12)
    throw ScenarioError("missing sensor spec: sensor_fov_deg must be in (0, 360]");

  s.streets.clear();
  s.frees.clear();
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const Cell c{x, y};
      switch (s.tag(c)) {
        case CellTag::Street:
          s.streets.push_back(c);
          break;
        case CellTag::Free:
          s.frees.push_back(c);
          break;
        default:
          break;
      }
    }
  }
  s.n_road = static_cast<int>(s.streets.size());

  for (std::size_t i = 0; i < n; ++i) {
    if (s.priority_map[i] && s.tags[i] != CellTag::Street)
      throw ScenarioError("priority on non-street cell");
  }

  std::sort(s.opacity.begin(), s.opacity.end(),
            [](const OpacityEntry& a, const OpacityEntry& b) { return yx_less(a.cell, b.cell); });
  s.opacity_map.assign(n, 0.0);
  for (std::size_t i = 0; i < s.opacity.size(); ++i) {
    const OpacityEntry& e = s.opacity[i];
    if (!s.in_bounds(e.cell)) throw ScenarioError("opacity cell out of bounds");
    if (s.tag(e.cell) != CellTag::Street) throw ScenarioError("opacity on non-street cell");
    if (e.value < 0.0 || e.value > 1.0) throw ScenarioError("opacity value outside [0, 1]");
    if (i > 0 && s.opacity[i - 1].cell == e.cell) throw ScenarioError("duplicate opacity entry");
    s.opacity_map[s.cell_index(e.cell)] = e.value;
  }
}

Scenario parse_scenario(const std::string& doc) {
  Scenario s;
  bool have_grid_len = false, have_range = false, have_fov = false;

  std::vector<std::string> rows;
  std::istringstream in(doc);
  std::string raw;
  bool in_grid = false;
  while (std::getline(in, raw)) {
    const std::string line = trim(raw);
    if (line.empty()) {
      if (in_grid) break;  // grid block ends at the first blank line
      continue;
    }
    if (is_grid_line(line)) {
      in_grid = true;
      rows.push_back(line);
      continue;
    }
    if (in_grid) throw ScenarioError("unexpected line after grid block: '" + line + "'");

    if (line.rfind("opacity", 0) == 0) {
      std::istringstream ls(line);
      std::string kw, xs, ys, vs, extra;
      ls >> kw >> xs >> ys >> vs;
      if (kw != "opacity" || xs.empty() || ys.empty() || vs.empty() || (ls >> extra))
        throw ScenarioError("malformed opacity line: '" + line + "'");
      OpacityEntry e;
      e.cell.x = static_cast<int>(parse_double(xs, "opacity x"));
      e.cell.y = static_cast<int>(parse_double(ys, "opacity y"));
      e.value = parse_double(vs, "opacity value");
      s.opacity.push_back(e);
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ScenarioError("malformed header line: '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "grid_len") {
      s.grid_len = parse_double(value, key);
      have_grid_len = true;
    } else if (key == "sensor_range") {
      s.sensor.range_m = parse_double(value, key);
      have_range = true;
    } else if (key == "sensor_fov_deg") {
      s.sensor_fov_deg = parse_double(value, key);
      have_fov = true;
    } else {
      throw ScenarioError("unknown header key: '" + key + "'");
    }
  }

  if (!have_grid_len) throw ScenarioError("missing grid_len");
  if (!have_range || !have_fov) throw ScenarioError("missing sensor spec");
  if (s.grid_len <= 0.0) throw ScenarioError("grid_len must be positive");
  if (rows.empty()) throw ScenarioError("missing grid block");

  s.height = static_cast<int>(rows.size());
  s.width = static_cast<int>(rows[0].size());
  s.tags.assign(static_cast<std::size_t>(s.width) * s.height, CellTag::Free);
  s.priority_map.assign(s.tags.size(), 0);
  for (int y = 0; y < s.height; ++y) {
    if (static_cast<int>(rows[y].size()) != s.width)
      throw ScenarioError("grid rows have unequal lengths");
    for (int x = 0; x < s.width; ++x) {
      const char c = rows[y][x];
      const int idx = y * s.width + x;
      switch (c) {
        case '#': s.tags[idx] = CellTag::Obstacle; break;
        case 'B': s.tags[idx] = CellTag::Blocked; break;
        case 'S': s.tags[idx] = CellTag::Street; break;
        case 'P':
          s.tags[idx] = CellTag::Street;
          s.priority_map[idx] = 1;
          break;
        case '.': s.tags[idx] = CellTag::Free; break;
        default:
          throw ScenarioError(std::string("unknown cell character '") + c + "'");
      }
    }
  }

  s.sensor.fov_rad = s.sensor_fov_deg * (kPi / 180.0);
  finalize_scenario(s);
  return s;
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "grid_len=" << fmt_double(s.grid_len) << "\n";
  out << "sensor_range=" << fmt_double(s.sensor.range_m) << "\n";
  out << "sensor_fov_deg=" << fmt_double(s.sensor_fov_deg) << "\n";
  for (const OpacityEntry& e : s.opacity)
    out << "opacity " << e.cell.x << " " << e.cell.y << " " << fmt_double(e.value) << "\n";
  out << "\n";
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const Cell c{x, y};
      char ch = '.';
      switch (s.tag(c)) {
        case CellTag::Obstacle: ch = '#'; break;
        case CellTag::Blocked: ch = 'B'; break;
        case CellTag::Street: ch = s.is_priority(c) ? 'P' : 'S'; break;
        case CellTag::Free: ch = '.'; break;
        case CellTag::SensorOccupied: ch = '.'; break;
      }
      out << ch;
    }
    out << "\n";
  }
  return out.str();
}

std::vector<OcclusionMask> sample_occlusion_masks(const Scenario& s, std::uint64_t seed,
                                                  int count) {
  if (count < 1) throw std::invalid_argument("mask count must be >= 1");
  std::vector<OcclusionMask> masks;
  masks.reserve(count);
  for (int m = 0; m < count; ++m) {
    RngStream rng = RngStream::derive(seed, {kMaskStreamTag, static_cast<std::uint64_t>(m)});
    OcclusionMask mask;
    mask.seed = seed;
    mask.opaque_map.assign(s.tags.size(), 0);
    for (const OpacityEntry& e : s.opacity) {  // entries are sorted by (y, x)
      if (rng.bernoulli(e.value)) {
        mask.opaque_now.push_back(e.cell);
        mask.opaque_map[s.cell_index(e.cell)] = 1;
      }
    }
    masks.push_back(std::move(mask));
  }
  return masks;
}

ScenarioStats scenario_stats(const Scenario& s) {
  ScenarioStats st;
  for (std::size_t i = 0; i < s.tags.size(); ++i) {
    switch (s.tags[i]) {
      case CellTag::Obstacle: ++st.n_obstacle; break;
      case CellTag::Blocked: ++st.n_blocked; break;
      case CellTag::Street: ++st.n_road; break;
      case CellTag::Free: ++st.n_free; break;
      case CellTag::SensorOccupied: break;
    }
    if (s.priority_map[i]) ++st.n_priority;
  }
  return st;
}

}  // namespace roadcover
