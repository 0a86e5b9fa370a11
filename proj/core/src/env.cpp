#include "safe_manip/env.hpp"

#include <algorithm>
#include <cmath>

#include "safe_manip/errors.hpp"

namespace safe_manip {

namespace {

ObstacleState make_obstacle(const ObstacleSpec& spec) {
  ObstacleState o;
  o.center = spec.center;
  o.half_extents = spec.half_extents;
  o.velocity = {0, 0, 0};
  o.axis = spec.axis;
  o.track_min = spec.track_min;
  o.track_max = spec.track_max;
  return o;
}

bool goal_inside_inflated(const Vec3& goal, const ScenarioConfig& scenario,
                          const std::vector<ObstacleState>& obstacles) {
  for (const auto& o : obstacles) {
    const Vec3 inflated = o.half_extents + scenario.object_half_extents;
    if (std::abs(goal.x - o.center.x) < inflated.x && std::abs(goal.y - o.center.y) < inflated.y &&
        std::abs(goal.z - o.center.z) < inflated.z) {
      return true;
    }
  }
  return false;
}

}  // namespace

ResetResult reset(const ScenarioConfig& scenario, std::uint64_t seed) {
  Rng rng(seed);
  ResetResult r;
  r.state.object_pos = scenario.start;
  r.state.object_vel = {0, 0, 0};
  r.state.tick = 0;
  for (const auto& spec : scenario.obstacles) {
    ObstacleState o = make_obstacle(spec);
    if (spec.dynamic()) {
      const double speed = rng.uniform(spec.speed_min, spec.speed_max);
      const double dir = rng.coin() ? 1.0 : -1.0;
      o.velocity[o.axis] = dir * speed;
    }
    r.state.obstacles.push_back(o);
  }
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Vec3 goal{rng.uniform(scenario.goal_x[0], scenario.goal_x[1]),
              rng.uniform(scenario.goal_y[0], scenario.goal_y[1]), scenario.goal_z};
    if (!goal_inside_inflated(goal, scenario, r.state.obstacles)) {
      r.goal = goal;
      return r;
    }
  }
  throw ConfigError("scenario '" + scenario.name +
                    "': goal region is blocked by obstacles (1000 rejected samples)");
}

Vec3 force_from_action(const ScenarioConfig& scenario, const Vec3& vel, const Vec3& action) {
  const double delta_max = scenario.delta_max();
  Vec3 f;
  for (int i = 0; i < 3; ++i) {
    const double delta = delta_max * action[i];
    f[i] = std::clamp(scenario.mass * (delta / scenario.dt - vel[i]) / scenario.dt,
                      -scenario.f_max, scenario.f_max);
  }
  return f;
}

void integrate_force(const ScenarioConfig& scenario, Vec3& pos, Vec3& vel, const Vec3& force) {
  for (int i = 0; i < 3; ++i) {
    vel[i] = std::clamp(vel[i] + force[i] / scenario.mass * scenario.dt, -scenario.v_max,
                        scenario.v_max);
    pos[i] = pos[i] + vel[i] * scenario.dt;
  }
}

void advance_obstacle(ObstacleState& o, double dt) {
  if (o.track_min == o.track_max) return;
  double c = o.center[o.axis] + o.velocity[o.axis] * dt;
  double v = o.velocity[o.axis];
  // Elastic reflection; loop handles the (never-hit in shipped configs) case
  // of a step longer than the track.
  int guard = 0;
  while ((c > o.track_max || c < o.track_min) && guard++ < 64) {
    if (c > o.track_max) {
      c = 2.0 * o.track_max - c;
      v = -v;
    } else {
      c = 2.0 * o.track_min - c;
      v = -v;
    }
  }
  o.center[o.axis] = std::clamp(c, o.track_min, o.track_max);
  o.velocity[o.axis] = v;
}

bool check_collision(const ScenarioConfig& scenario, const Vec3& object_pos,
                     const std::vector<ObstacleState>& obstacles) {
  for (const auto& o : obstacles) {
    if (aabb_overlap(object_pos, scenario.object_half_extents, o.center, o.half_extents)) {
      return true;
    }
  }
  return false;
}

bool is_success(const Vec3& pos, const Vec3& goal, double radius) {
  return dist(pos, goal) <= radius;
}

double reward_of(bool collided, const Vec3& pos, const Vec3& goal, const ScenarioConfig& scenario) {
  if (collided) return scenario.eta;
  if (is_success(pos, goal, scenario.success_radius)) return 0.0;
  return -1.0;
}

Vec3 state_to_goal(const EnvState& state) { return state.object_pos; }

StepResult step(const ScenarioConfig& scenario, const EnvState& state, const Vec3& action,
                const Vec3& goal) {
  StepResult r;
  r.next = state;

  Vec3 a = clamp(action, -1.0, 1.0);
  if (!scenario.actuate_z) a.z = 0.0;

  const Vec3 force = force_from_action(scenario, state.object_vel, a);
  integrate_force(scenario, r.next.object_pos, r.next.object_vel, force);
  r.next.object_pos = clamp(r.next.object_pos, scenario.workspace_min, scenario.workspace_max);

  for (auto& o : r.next.obstacles) advance_obstacle(o, scenario.dt);

  r.collided = check_collision(scenario, r.next.object_pos, r.next.obstacles);
  r.reward = reward_of(r.collided, r.next.object_pos, goal, scenario);
  r.next.tick = state.tick + 1;
  return r;
}

int observation_size(const ScenarioConfig& scenario) {
  return 6 + 9 * static_cast<int>(scenario.obstacles.size()) + 3;
}

Eigen::VectorXd observe(const EnvState& state, const Vec3& goal, const ScenarioConfig& scenario) {
  if (state.obstacles.size() != scenario.obstacles.size()) {
    throw ShapeError("observe: state obstacle count does not match the scenario");
  }
  Eigen::VectorXd obs(observation_size(scenario));
  int k = 0;
  auto put = [&](const Vec3& v) {
    obs[k++] = v.x;
    obs[k++] = v.y;
    obs[k++] = v.z;
  };
  put(state.object_pos);
  put(state.object_vel);
  for (const auto& o : state.obstacles) {
    put(o.center);
    put(o.velocity);
    put(o.half_extents);
  }
  put(goal);
  return obs;
}

std::vector<std::vector<ObstacleState>> predict_obstacles(const EnvState& state, int horizon,
                                                          double dt) {
  std::vector<std::vector<ObstacleState>> stages;
  stages.reserve(horizon);
  std::vector<ObstacleState> current = state.obstacles;
  for (int k = 0; k < horizon; ++k) {
    for (auto& o : current) advance_obstacle(o, dt);
    stages.push_back(current);
  }
  return stages;
}

}  // namespace safe_manip
