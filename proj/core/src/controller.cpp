#include "safe_manip/controller.hpp"

#include <algorithm>
#include <cmath>

#include "safe_manip/errors.hpp"

namespace safe_manip {

ControllerKind controller_from_name(const std::string& name) {
  if (name == "hgg") return ControllerKind::kHgg;
  if (name == "mpc") return ControllerKind::kMpc;
  if (name == "mpc-hgg") return ControllerKind::kMpcHgg;
  throw ConfigError("unknown controller '" + name + "' (expected hgg, mpc, or mpc-hgg)");
}

std::string controller_name(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kHgg: return "hgg";
    case ControllerKind::kMpc: return "mpc";
    case ControllerKind::kMpcHgg: return "mpc-hgg";
  }
  return "?";
}

std::string mode_name(ControlDiag::Mode mode) {
  switch (mode) {
    case ControlDiag::Mode::kPolicy: return "policy";
    case ControlDiag::Mode::kMpc: return "mpc";
    case ControlDiag::Mode::kFallback: return "fallback";
    case ControlDiag::Mode::kDecel: return "decel";
  }
  return "?";
}

Vec3 intermediate_goal(const DdpgAgent& agent, const EnvState& state, const Vec3& goal,
                       const ScenarioConfig& scenario, const MpcProblem& problem) {
  const double reach = problem.horizon * scenario.v_max * scenario.dt;
  if (dist(state.object_pos, goal) <= reach) return goal;
  Rng unused(0);  // deterministic path: exploration is never used here
  const Vec3 a =
      select_action(agent, observe(state, goal, scenario), /*explore=*/false, unused);
  const double scale = reach / 2.0;
  Vec3 g = state.object_pos + scale * a;
  if (!scenario.actuate_z) g.z = state.object_pos.z;
  return clamp(g, scenario.workspace_min, scenario.workspace_max);
}

namespace {

Vec3 brake_force(const ScenarioConfig& scenario, const Vec3& vel) {
  Vec3 f;
  for (int i = 0; i < 3; ++i) {
    f[i] = std::clamp(-scenario.mass * vel[i] / scenario.dt, -scenario.f_max, scenario.f_max);
  }
  return f;
}

// Converts a chosen force into the env displacement action by predicting
// the next position under the shared model.
Vec3 action_from_force(const ScenarioConfig& scenario, const EnvState& state, const Vec3& force) {
  const PointMassModel model = model_from_scenario(scenario);
  const MpcState next = dynamics_step(model, {state.object_pos, state.object_vel}, force);
  const double delta_max = scenario.delta_max();
  Vec3 action = (next.pos - state.object_pos) / delta_max;
  if (!scenario.actuate_z) action.z = 0.0;
  return clamp(action, -1.0, 1.0);
}

}  // namespace

Vec3 no_action(const ScenarioConfig& scenario, const EnvState& state) {
  return action_from_force(scenario, state, brake_force(scenario, state.object_vel));
}

ActResult act(const DdpgAgent* agent, const ScenarioConfig& scenario, const MpcProblem& problem,
              ControllerKind kind, ControllerState& ctrl, const EnvState& state,
              const Vec3& goal) {
  ActResult result;
  result.diag.g_t = goal;

  if (kind == ControllerKind::kHgg) {
    if (agent == nullptr) throw ConfigError("hgg controller needs a checkpoint");
    Rng unused(0);
    result.action =
        select_action(*agent, observe(state, goal, scenario), /*explore=*/false, unused);
    if (!scenario.actuate_z) result.action.z = 0.0;
    result.diag.mode = ControlDiag::Mode::kPolicy;
    return result;
  }

  Vec3 g_t = goal;
  if (kind == ControllerKind::kMpcHgg) {
    if (agent == nullptr) throw ConfigError("mpc-hgg controller needs a checkpoint");
    g_t = intermediate_goal(*agent, state, goal, scenario, problem);
  }
  result.diag.g_t = g_t;

  const PointMassModel model = model_from_scenario(scenario);
  MpcParams params;
  params.goal = g_t;
  params.obstacle_stages = predict_obstacles(state, problem.horizon, scenario.dt);
  params.robot_half_extents = scenario.object_half_extents;

  const MpcState init{state.object_pos, state.object_vel};
  MpcSolution solution;
  if (ctrl.prev.has_value()) {
    const Eigen::Matrix3Xd warm = shifted_warm_start(*ctrl.prev);
    solution = solve(model, problem, params, init, &warm);
  } else {
    solution = solve(model, problem, params, init);
  }
  result.diag.solver_ran = true;
  result.diag.feasible = solution.feasible;
  result.diag.violation = solution.max_violation;
  result.diag.solver = solution.diag;
  result.diag.predicted.reserve(solution.predicted.size());
  for (const auto& s : solution.predicted) result.diag.predicted.push_back(s.pos);

  Vec3 force;
  if (solution.feasible) {
    force = {solution.controls(0, 0), solution.controls(1, 0), solution.controls(2, 0)};
    ctrl.prev = std::move(solution);
    ctrl.fallback_m = 1;
    result.diag.mode = ControlDiag::Mode::kMpc;
  } else {
    ctrl.fallback_m = std::min(ctrl.fallback_m + 1, problem.horizon);
    if (ctrl.prev.has_value() && ctrl.fallback_m < problem.horizon) {
      // Stage m of the cached plan, 1-based: stage 1 was executed when the
      // plan was made, so the first fallback executes stage 2.
      const int col = ctrl.fallback_m - 1;
      force = {ctrl.prev->controls(0, col), ctrl.prev->controls(1, col),
               ctrl.prev->controls(2, col)};
      result.diag.mode = ControlDiag::Mode::kFallback;
    } else {
      force = brake_force(scenario, state.object_vel);
      result.diag.mode = ControlDiag::Mode::kDecel;
    }
  }
  result.diag.fallback_m = ctrl.fallback_m;
  result.action = action_from_force(scenario, state, force);
  return result;
}

}  // namespace safe_manip
