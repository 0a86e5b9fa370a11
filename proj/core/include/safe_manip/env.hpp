#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "safe_manip/geometry.hpp"
#include "safe_manip/rng.hpp"
#include "safe_manip/scenario.hpp"

namespace safe_manip {

struct ObstacleState {
  Vec3 center;
  Vec3 half_extents;
  Vec3 velocity;  // nonzero only along axis
  int axis = 1;
  double track_min = 0.0;
  double track_max = 0.0;
};

// Full simulator state; plain value type so states can be copied, stored in
// trajectories, and replayed freely.
struct EnvState {
  Vec3 object_pos;
  Vec3 object_vel;
  std::vector<ObstacleState> obstacles;
  int tick = 0;
};

struct ResetResult {
  EnvState state;
  Vec3 goal;
};

struct StepResult {
  EnvState next;
  double reward = -1.0;
  bool collided = false;
};

// Seeded reset: object at the scenario start pose with zero velocity, each
// dynamic obstacle with speed uniform in its configured range and a random
// direction, goal uniform in the goal region and outside every obstacle's
// inflated box. Same seed, same scenario: identical result.
ResetResult reset(const ScenarioConfig& scenario, std::uint64_t seed);

// One simulator tick: displacement action in [-1,1]^3 converted to a force
// by the dead-beat law, semi-implicit Euler integration with velocity clamp,
// workspace position clamp, obstacle advance with elastic track reversal,
// AABB collision check, and the sparse reward against goal.
StepResult step(const ScenarioConfig& scenario, const EnvState& state, const Vec3& action,
                const Vec3& goal);

bool is_success(const Vec3& pos, const Vec3& goal, double radius);

// Sparse multi-objective reward: eta on collision (takes precedence), 0 on
// success, -1 otherwise.
double reward_of(bool collided, const Vec3& pos, const Vec3& goal, const ScenarioConfig& scenario);

// Achieved goal of a state (the object position).
Vec3 state_to_goal(const EnvState& state);

// Flat observation [object_pos, object_vel, per-obstacle (center, velocity,
// half_extents), goal]; the policy and critic consume this layout.
Eigen::VectorXd observe(const EnvState& state, const Vec3& goal, const ScenarioConfig& scenario);
int observation_size(const ScenarioConfig& scenario);

// Obstacle boxes for stages 1..horizon, advanced with exactly the per-tick
// rule step() applies, so prediction is exact under simulator dynamics.
std::vector<std::vector<ObstacleState>> predict_obstacles(const EnvState& state, int horizon,
                                                          double dt);

// The force path of step(): dead-beat force from a displacement action, then
// clamped semi-implicit Euler. Exposed so the planner-side model can be
// cross-checked against the simulator bit for bit.
Vec3 force_from_action(const ScenarioConfig& scenario, const Vec3& vel, const Vec3& action);
void integrate_force(const ScenarioConfig& scenario, Vec3& pos, Vec3& vel, const Vec3& force);

// One obstacle tick: center advances by velocity * dt, reflecting at track
// bounds with flipped velocity.
void advance_obstacle(ObstacleState& o, double dt);

bool check_collision(const ScenarioConfig& scenario, const Vec3& object_pos,
                     const std::vector<ObstacleState>& obstacles);

}  // namespace safe_manip
