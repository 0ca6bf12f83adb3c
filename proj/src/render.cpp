#include "roadcover/render.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace roadcover {

namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

const char* tag_color(CellTag t) {
  switch (t) {
    case CellTag::Obstacle: return "#4a4a4a";
    case CellTag::Blocked: return "#c8c8c8";
    case CellTag::Street: return "#9aa0a6";
    case CellTag::Free: return "#efefe9";
    case CellTag::SensorOccupied: return "#efefe9";
  }
  return "#ffffff";
}

}  // namespace

std::string render_svg(const Scenario& s, std::span<const Gene> genes,
                       const CoverageMetrics* metrics, const RenderOptions& opts) {
  for (const Gene& g : genes)
    if (!s.in_bounds(g.cell()))
      throw std::invalid_argument("render: gene outside the grid");

  const double k = opts.px_per_m * s.grid_len;  // pixels per cell
  const double width = s.width * k;
  const double height = s.height * k;
  const double legend_h = 22.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(height + legend_h) << "\" viewBox=\"0 0 " << num(width) << " "
      << num(height + legend_h) << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\""
      << num(height + legend_h) << "\" fill=\"#ffffff\"/>\n";

  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const Cell c{x, y};
      svg << "<rect x=\"" << num(x * k) << "\" y=\"" << num(y * k) << "\" width=\"" << num(k)
          << "\" height=\"" << num(k) << "\" fill=\"" << tag_color(s.tag(c)) << "\"/>\n";
      if (s.is_priority(c))
        svg << "<rect x=\"" << num(x * k + k * 0.15) << "\" y=\"" << num(y * k + k * 0.15)
            << "\" width=\"" << num(k * 0.7) << "\" height=\"" << num(k * 0.7)
            << "\" fill=\"none\" stroke=\"#c05050\" stroke-width=\"" << num(k * 0.12)
            << "\"/>\n";
      const double op = s.opacity_at(c);
      if (op > 0.0)
        svg << "<rect x=\"" << num(x * k) << "\" y=\"" << num(y * k) << "\" width=\"" << num(k)
            << "\" height=\"" << num(k) << "\" fill=\"#303030\" fill-opacity=\""
            << num(0.5 * op) << "\"/>\n";
    }
  }

  // FoV wedges, then sensor dots on top.
  const double r_px = s.sensor.range_m * opts.px_per_m;
  for (const Gene& g : genes) {
    const double cx = (g.x + 0.5) * k;
    const double cy = (g.y + 0.5) * k;
    const double fov = s.sensor.fov_rad;
    if (fov >= kTwoPi - 1e-9) {
      svg << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"" << num(r_px)
          << "\" fill=\"#2a76c9\" fill-opacity=\"0.22\" stroke=\"#2a76c9\" "
             "stroke-width=\"0.8\"/>\n";
    } else {
      const double a0 = g.phi - fov * 0.5;
      const double a1 = g.phi + fov * 0.5;
      const int large_arc = fov > kPi ? 1 : 0;
      svg << "<path d=\"M " << num(cx) << " " << num(cy) << " L "
          << num(cx + r_px * std::cos(a0)) << " " << num(cy + r_px * std::sin(a0)) << " A "
          << num(r_px) << " " << num(r_px) << " 0 " << large_arc << " 1 "
          << num(cx + r_px * std::cos(a1)) << " " << num(cy + r_px * std::sin(a1))
          << " Z\" fill=\"#2a76c9\" fill-opacity=\"0.22\" stroke=\"#2a76c9\" "
             "stroke-width=\"0.8\"/>\n";
    }
  }
  for (const Gene& g : genes)
    svg << "<circle cx=\"" << num((g.x + 0.5) * k) << "\" cy=\"" << num((g.y + 0.5) * k)
        << "\" r=\"" << num(std::max(2.0, k * 0.3)) << "\" fill=\"#123a66\"/>\n";

  std::ostringstream legend;
  legend << "N_sens=" << genes.size();
  if (metrics) {
    legend << "  c=" << num(metrics->c);
    if (metrics->c_eff) legend << "  c_eff=" << num(*metrics->c_eff);
  }
  svg << "<text x=\"4\" y=\"" << num(height + legend_h - 7)
      << "\" font-family=\"monospace\" font-size=\"12\" fill=\"#222222\">" << legend.str()
      << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace roadcover
