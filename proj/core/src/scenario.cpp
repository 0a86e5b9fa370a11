#include "safe_manip/scenario.hpp"

#include <cmath>

#include "safe_manip/errors.hpp"

namespace safe_manip {

namespace {

Vec3 vec3_from(const TomlTable& t, const std::string& key) {
  const auto a = t.number_array(key);
  if (a.size() != 3) throw ConfigError("config key '" + key + "' must have 3 elements");
  return {a[0], a[1], a[2]};
}

void range_from(const TomlTable& t, const std::string& key, double out[2]) {
  const auto a = t.number_array(key);
  if (a.size() != 2) throw ConfigError("config key '" + key + "' must have 2 elements");
  out[0] = a[0];
  out[1] = a[1];
}

int axis_from(const TomlTable& t) {
  const std::string a = t.str_or("axis", "y");
  if (a == "x") return 0;
  if (a == "y") return 1;
  if (a == "z") return 2;
  throw ConfigError("obstacle axis must be one of x, y, z (got '" + a + "')");
}

void apply_defaults(ScenarioConfig& s, const TomlTable& t) {
  s.dt = t.number_or("dt", s.dt);
  s.episode_len = static_cast<int>(t.number_or("episode_len", s.episode_len));
  s.v_max = t.number_or("v_max", s.v_max);
  s.f_max = t.number_or("f_max", s.f_max);
  s.mass = t.number_or("mass", s.mass);
  s.success_radius = t.number_or("success_radius", s.success_radius);
  s.eta = t.number_or("eta", s.eta);
  if (t.has("object_half_extents")) s.object_half_extents = vec3_from(t, "object_half_extents");
}

// Per-scenario dynamic-obstacle speed ranges that are part of the task
// definitions; the loader rejects configs that drift from them.
struct PinnedSpeeds {
  const char* name;
  double lo, hi;
};
constexpr PinnedSpeeds kPinned[] = {
    {"DynamicSquareObstacles", 0.6, 0.9},
    {"DynamicMixedObstacles", 0.6, 0.9},
    {"DynamicRectObstacles", 0.2, 0.6},
};

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  return {"DynamicSquareObstacles", "DynamicMixedObstacles", "DynamicRectObstacles",
          "DynamicLiftedObstacles"};
}

ScenarioConfig load_scenario(const TomlTable& config, const std::string& name) {
  const TomlTable* scenarios = config.table("scenario");
  if (scenarios == nullptr) throw ConfigError("config has no [scenario.*] tables");
  const TomlTable* t = scenarios->table(name);
  if (t == nullptr) {
    std::string known;
    for (const auto& k : scenarios->table_keys()) known += (known.empty() ? "" : ", ") + k;
    throw ConfigError("unknown scenario '" + name + "' (config defines: " + known + ")");
  }

  ScenarioConfig s;
  s.name = name;
  if (const TomlTable* d = config.table("defaults")) apply_defaults(s, *d);
  apply_defaults(s, *t);

  s.workspace_min = vec3_from(*t, "workspace_min");
  s.workspace_max = vec3_from(*t, "workspace_max");
  s.start = vec3_from(*t, "start");
  range_from(*t, "goal_x", s.goal_x);
  range_from(*t, "goal_y", s.goal_y);
  s.goal_z = t->number("goal_z");
  s.actuate_z = t->boolean_or("actuate_z", false);

  const auto* obstacles = t->table_array("obstacle");
  if (obstacles == nullptr || obstacles->empty()) {
    throw ConfigError("scenario '" + name + "' defines no obstacles");
  }
  for (const auto& ot : *obstacles) {
    ObstacleSpec o;
    o.center = vec3_from(ot, "center");
    o.half_extents = vec3_from(ot, "half_extents");
    o.axis = axis_from(ot);
    double track[2];
    range_from(ot, "track", track);
    o.track_min = track[0];
    o.track_max = track[1];
    double speed[2] = {0.0, 0.0};
    if (ot.has("speed")) range_from(ot, "speed", speed);
    o.speed_min = speed[0];
    o.speed_max = speed[1];
    s.obstacles.push_back(o);
  }

  validate_scenario(s);
  return s;
}

ScenarioConfig load_scenario_file(const std::string& path, const std::string& name) {
  return load_scenario(TomlTable::parse_file(path), name);
}

void validate_scenario(const ScenarioConfig& s) {
  auto fail = [&](const std::string& msg) {
    throw ConfigError("scenario '" + s.name + "': " + msg);
  };
  if (!(s.dt > 0.0)) fail("dt must be > 0");
  if (s.episode_len <= 0) fail("episode_len must be > 0");
  if (!(s.v_max > 0.0)) fail("v_max must be > 0");
  if (!(s.f_max > 0.0)) fail("f_max must be > 0");
  if (!(s.mass > 0.0)) fail("mass must be > 0");
  if (!(s.success_radius > 0.0)) fail("success_radius must be > 0");
  if (!(s.eta < -1.0)) fail("eta must be < -1");
  for (int i = 0; i < 3; ++i) {
    if (!(s.workspace_min[i] < s.workspace_max[i])) fail("workspace_min must be < workspace_max");
    if (!(s.object_half_extents[i] > 0.0)) fail("object_half_extents must be > 0");
  }
  if (!(s.goal_x[0] <= s.goal_x[1]) || !(s.goal_y[0] <= s.goal_y[1])) {
    fail("goal ranges must be ordered");
  }
  auto inside_ws = [&](const Vec3& p) {
    return p.x >= s.workspace_min.x && p.x <= s.workspace_max.x && p.y >= s.workspace_min.y &&
           p.y <= s.workspace_max.y && p.z >= s.workspace_min.z && p.z <= s.workspace_max.z;
  };
  if (!inside_ws(s.start)) fail("start pose outside workspace");
  if (!inside_ws({s.goal_x[0], s.goal_y[0], s.goal_z}) ||
      !inside_ws({s.goal_x[1], s.goal_y[1], s.goal_z})) {
    fail("goal region outside workspace");
  }
  for (std::size_t i = 0; i < s.obstacles.size(); ++i) {
    const auto& o = s.obstacles[i];
    const std::string tag = "obstacle " + std::to_string(i) + ": ";
    for (int a = 0; a < 3; ++a) {
      if (!(o.half_extents[a] > 0.0)) fail(tag + "half_extents must be > 0");
    }
    if (o.axis < 0 || o.axis > 2) fail(tag + "axis out of range");
    if (!(o.track_min <= o.track_max)) fail(tag + "track bounds must be ordered");
    if (o.center[o.axis] < o.track_min || o.center[o.axis] > o.track_max) {
      fail(tag + "center must start inside its track");
    }
    if (o.speed_min < 0.0 || o.speed_max < o.speed_min) fail(tag + "bad speed range");
    if (o.dynamic() && o.track_min == o.track_max) fail(tag + "dynamic obstacle needs a track");
  }
  for (const auto& pin : kPinned) {
    if (s.name != pin.name) continue;
    for (std::size_t i = 0; i < s.obstacles.size(); ++i) {
      const auto& o = s.obstacles[i];
      if (!o.dynamic()) continue;
      if (o.speed_min != pin.lo || o.speed_max != pin.hi) {
        fail("obstacle " + std::to_string(i) + ": dynamic speed range must be [" +
             std::to_string(pin.lo) + ", " + std::to_string(pin.hi) + "] for this scenario");
      }
    }
  }
}

}  // namespace safe_manip
