#include "safe_manip/svg_render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace safe_manip {

namespace {

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Mapper {
  double lo_x, hi_y, scale, margin;
  double x(double wx) const { return margin + (wx - lo_x) * scale; }
  double y(double wy) const { return margin + (hi_y - wy) * scale; }
};

void rect(std::ostringstream& out, const Mapper& m, const Vec3& center, const Vec3& half,
          const std::string& style) {
  out << "<rect x=\"" << px(m.x(center.x - half.x)) << "\" y=\"" << px(m.y(center.y + half.y))
      << "\" width=\"" << px(2.0 * half.x * m.scale) << "\" height=\""
      << px(2.0 * half.y * m.scale) << "\" " << style << "/>\n";
}

void cross(std::ostringstream& out, const Mapper& m, const Vec3& p, double r,
           const std::string& style) {
  const double cx = m.x(p.x), cy = m.y(p.y);
  out << "<path d=\"M" << px(cx - r) << " " << px(cy - r) << " L" << px(cx + r) << " "
      << px(cy + r) << " M" << px(cx - r) << " " << px(cy + r) << " L" << px(cx + r) << " "
      << px(cy - r) << "\" " << style << "/>\n";
}

}  // namespace

std::string render_svg(const TrajectoryLog& log, const RenderOptions& opts) {
  const TrajLogMeta& meta = log.meta;
  const double span_x = std::max(meta.workspace_hi.x - meta.workspace_lo.x, 1e-9);
  const double span_y = std::max(meta.workspace_hi.y - meta.workspace_lo.y, 1e-9);
  Mapper m{meta.workspace_lo.x, meta.workspace_hi.y, opts.width / span_x, opts.margin};
  const double draw_h = span_y * m.scale;
  const double canvas_w = opts.width + 2.0 * opts.margin;
  const double canvas_h = draw_h + 2.0 * opts.margin;

  const int ticks = static_cast<int>(log.ticks.size());
  int collisions = 0;
  for (const auto& r : log.ticks) collisions += r.collided ? 1 : 0;

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(canvas_w) << "\" height=\""
      << px(canvas_h) << "\" viewBox=\"0 0 " << px(canvas_w) << " " << px(canvas_h) << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << px(canvas_w) << "\" height=\"" << px(canvas_h)
      << "\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"" << px(opts.margin) << "\" y=\"" << px(opts.margin * 0.55)
      << "\" font-family=\"monospace\" font-size=\"13\" fill=\"#333333\">"
      << escape_xml(meta.scenario) << " / " << escape_xml(meta.controller)
      << "  seed=" << meta.seed << "  steps=" << ticks << "  collision ticks=" << collisions
      << "</text>\n";
  out << "<rect x=\"" << px(m.x(meta.workspace_lo.x)) << "\" y=\"" << px(m.y(meta.workspace_hi.y))
      << "\" width=\"" << px(span_x * m.scale) << "\" height=\"" << px(draw_h)
      << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1.5\"/>\n";

  // Obstacle outlines at evenly spaced ticks, start included, later darker.
  const int snaps = std::max(1, std::min(opts.obstacle_snapshots, ticks + 1));
  for (int i = 0; i < snaps; ++i) {
    const int idx = snaps == 1 ? 0 : static_cast<int>(std::lround(
        static_cast<double>(i) * ticks / (snaps - 1)));
    const std::vector<ObstacleState>& obs =
        idx == 0 ? meta.start_obstacles : log.ticks[static_cast<std::size_t>(idx - 1)].obstacles;
    const double opacity = snaps == 1 ? 0.5 : 0.12 + 0.45 * i / (snaps - 1);
    for (const auto& o : obs) {
      rect(out, m, o.center, o.half_extents,
           "fill=\"#d95f02\" fill-opacity=\"" + px(opacity) + "\" stroke=\"none\"");
    }
  }

  // Planned position chains from the solver, subsampled.
  if (opts.predicted_every > 0) {
    for (int t = 0; t < ticks; t += opts.predicted_every) {
      const TickRecord& r = log.ticks[static_cast<std::size_t>(t)];
      if (!r.has_ctrl || !r.solver_ran || r.predicted.size() < 2) continue;
      out << "<polyline fill=\"none\" stroke=\"#999999\" stroke-width=\"1\" "
             "stroke-dasharray=\"3 3\" points=\"";
      for (const auto& p : r.predicted) out << px(m.x(p.x)) << "," << px(m.y(p.y)) << " ";
      out << "\"/>\n";
    }
  }

  // Goal disc at the success radius, then the executed path.
  out << "<circle cx=\"" << px(m.x(meta.goal.x)) << "\" cy=\"" << px(m.y(meta.goal.y))
      << "\" r=\"" << px(meta.success_radius * m.scale)
      << "\" fill=\"#7570b3\" fill-opacity=\"0.15\" stroke=\"#7570b3\" "
         "stroke-dasharray=\"4 3\"/>\n";
  out << "<circle cx=\"" << px(m.x(meta.goal.x)) << "\" cy=\"" << px(m.y(meta.goal.y))
      << "\" r=\"3\" fill=\"#7570b3\"/>\n";

  // One path vertex per tick; the start pose is drawn separately below.
  if (!log.ticks.empty()) {
    out << "<polyline fill=\"none\" stroke=\"#1b9e77\" stroke-width=\"2\" points=\"";
    for (const auto& r : log.ticks) out << px(m.x(r.pos.x)) << "," << px(m.y(r.pos.y)) << " ";
    out << "\"/>\n";
  }

  for (const auto& r : log.ticks) {
    if (r.has_ctrl && (r.mode == "mpc" || r.mode == "fallback")) {
      cross(out, m, r.g_t, 4.0, "stroke=\"#7570b3\" stroke-width=\"1.2\"");
    }
  }
  for (const auto& r : log.ticks) {
    if (r.collided) {
      out << "<circle cx=\"" << px(m.x(r.pos.x)) << "\" cy=\"" << px(m.y(r.pos.y))
          << "\" r=\"3.5\" fill=\"#d62728\"/>\n";
    }
  }

  rect(out, m, meta.start_pos, meta.object_half_extents,
       "fill=\"none\" stroke=\"#1b9e77\" stroke-width=\"1\" stroke-dasharray=\"2 2\"");
  out << "<circle cx=\"" << px(m.x(meta.start_pos.x)) << "\" cy=\"" << px(m.y(meta.start_pos.y))
      << "\" r=\"3\" fill=\"#111111\"/>\n";
  if (!log.ticks.empty()) {
    const Vec3& last = log.ticks.back().pos;
    rect(out, m, last, meta.object_half_extents,
         "fill=\"none\" stroke=\"#1b9e77\" stroke-width=\"1.2\"");
  }

  out << "</svg>\n";
  return out.str();
}

}  // namespace safe_manip
