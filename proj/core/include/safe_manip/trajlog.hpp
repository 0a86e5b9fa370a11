#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "safe_manip/controller.hpp"
#include "safe_manip/env.hpp"
#include "safe_manip/hgg.hpp"
#include "safe_manip/scenario.hpp"

namespace safe_manip {

// Header line of a trajectory log; carries enough geometry to render the
// episode without the scenario file.
struct TrajLogMeta {
  int version = 1;
  std::string scenario;
  std::string controller;
  std::uint64_t seed = 0;
  Vec3 goal;
  double dt = 0.05;
  double success_radius = 0.05;
  Vec3 workspace_lo;
  Vec3 workspace_hi;
  Vec3 object_half_extents;
  Vec3 start_pos;
  Vec3 start_vel;
  std::vector<ObstacleState> start_obstacles;
};

// One tick: post-step state plus the control diagnostics that produced it.
struct TickRecord {
  int t = 0;
  Vec3 pos;
  Vec3 vel;
  std::vector<ObstacleState> obstacles;  // half extents included per tick
  Vec3 action;
  double reward = 0.0;
  bool collided = false;

  bool has_ctrl = false;
  std::string mode;
  Vec3 g_t;
  int fallback_m = 1;
  bool solver_ran = false;
  bool feasible = false;
  double violation = 0.0;
  int solver_iterations = 0;
  double solver_cost = 0.0;
  std::vector<Vec3> predicted;  // planned positions 0..N when the solver ran
};

struct TrajectoryLog {
  TrajLogMeta meta;
  std::vector<TickRecord> ticks;
};

// One JSON object per line: meta first, then a record per executed step.
// diags may be empty (policy-only episodes have no solver diagnostics).
void write_trajectory_log(const std::string& path, const ScenarioConfig& scenario,
                          const std::string& controller, std::uint64_t seed,
                          const Trajectory& traj, const std::vector<ControlDiag>& diags);

// Parses a log written by write_trajectory_log; malformed input raises
// IoError naming the offending line.
TrajectoryLog read_trajectory_log(const std::string& path);

}  // namespace safe_manip
