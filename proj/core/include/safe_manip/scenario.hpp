#pragma once

#include <string>
#include <vector>

#include "safe_manip/geometry.hpp"
#include "safe_manip/toml_lite.hpp"

namespace safe_manip {

// A box obstacle sliding along one axis between track bounds. Static
// obstacles have speed_min = speed_max = 0 and never move.
struct ObstacleSpec {
  Vec3 center;        // initial center
  Vec3 half_extents;  // half-extents per axis
  int axis = 1;       // 0 = x, 1 = y, 2 = z: axis the center slides along
  double track_min = 0.0;
  double track_max = 0.0;
  double speed_min = 0.0;
  double speed_max = 0.0;

  bool dynamic() const { return speed_max > 0.0; }
};

struct ScenarioConfig {
  std::string name;
  Vec3 workspace_min;
  Vec3 workspace_max;
  Vec3 start;               // object start center, zero velocity
  double goal_x[2] = {0, 0};  // goal region x range
  double goal_y[2] = {0, 0};  // goal region y range
  double goal_z = 0.0;        // goals sit on the table
  bool actuate_z = false;     // false: z held fixed, action z channel zeroed
  Vec3 object_half_extents{0.02, 0.02, 0.02};

  double dt = 0.05;
  int episode_len = 50;
  double v_max = 0.5;
  double f_max = 5.0;
  double mass = 1.0;
  double success_radius = 0.05;
  double eta = -5.0;  // collision reward, must be < -1

  std::vector<ObstacleSpec> obstacles;

  double delta_max() const { return v_max * dt; }  // max displacement per tick
};

// Canonical scenario names the config file is expected to define.
std::vector<std::string> builtin_scenario_names();

// Loads one scenario table (plus [defaults]) from a parsed config.
// Throws ConfigError on unknown names or invariant violations.
ScenarioConfig load_scenario(const TomlTable& config, const std::string& name);
ScenarioConfig load_scenario_file(const std::string& path, const std::string& name);

// Validates every invariant the rest of the stack relies on; throws
// ConfigError naming the offending field.
void validate_scenario(const ScenarioConfig& s);

}  // namespace safe_manip
