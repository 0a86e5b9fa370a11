#pragma once

#include <optional>
#include <string>
#include <vector>

#include "safe_manip/ddpg.hpp"
#include "safe_manip/env.hpp"
#include "safe_manip/mpc.hpp"

namespace safe_manip {

enum class ControllerKind {
  kHgg,     // policy actions executed directly, no MPC
  kMpc,     // MPC tracking the episode goal directly, no policy
  kMpcHgg,  // policy proposes intermediate goals, MPC executes safely
};

ControllerKind controller_from_name(const std::string& name);
std::string controller_name(ControllerKind kind);

struct ControllerState {
  std::optional<MpcSolution> prev;  // last feasible solution
  int fallback_m = 1;               // stage ladder index, in [1, horizon]
};

struct ControlDiag {
  enum class Mode { kPolicy, kMpc, kFallback, kDecel };
  Mode mode = Mode::kPolicy;
  Vec3 g_t;             // tracked goal this step
  bool solver_ran = false;
  bool feasible = false;
  int fallback_m = 1;
  double violation = 0.0;
  SolverDiag solver;               // valid when solver_ran
  std::vector<Vec3> predicted;     // predicted positions 0..N when solver_ran
};

std::string mode_name(ControlDiag::Mode mode);

// Intermediate goal: the episode goal itself when within the horizon's
// reach (|p - g| <= N * v_max * dt), otherwise the policy action scaled by
// N * v_max * dt / 2 and applied as an offset from the current position,
// clamped to the workspace.
Vec3 intermediate_goal(const DdpgAgent& agent, const EnvState& state, const Vec3& goal,
                       const ScenarioConfig& scenario, const MpcProblem& problem);

// Pure braking displacement action whose dead-beat force is
// clamp(-m v / dt, +-f_max).
Vec3 no_action(const ScenarioConfig& scenario, const EnvState& state);

struct ActResult {
  Vec3 action;  // env displacement action in [-1, 1]^3
  ControlDiag diag;
};

// One control step. For the MPC kinds: solve toward g_t with warm start;
// feasible solves execute stage 1 and reset the ladder; infeasible solves
// climb the cached plan's stages and finally brake. Deterministic given
// (state, goal, controller state, agent).
ActResult act(const DdpgAgent* agent, const ScenarioConfig& scenario, const MpcProblem& problem,
              ControllerKind kind, ControllerState& ctrl, const EnvState& state,
              const Vec3& goal);

}  // namespace safe_manip
