#pragma once

#include <string>

#include "safe_manip/trajlog.hpp"

namespace safe_manip {

struct RenderOptions {
  double width = 640.0;        // drawing area width, px
  double margin = 40.0;
  int obstacle_snapshots = 8;  // evenly spaced obstacle outlines over the episode
  int predicted_every = 5;     // dashed planned-position chains, 0 disables
};

// Top-down view of one logged episode: workspace frame, obstacle snapshots
// fading in over time, object path, goal disc, tracked intermediate goals,
// and the solver's planned position chains. Always well-formed XML; a log
// with no ticks renders the frame and start pose alone.
std::string render_svg(const TrajectoryLog& log, const RenderOptions& opts = {});

}  // namespace safe_manip
