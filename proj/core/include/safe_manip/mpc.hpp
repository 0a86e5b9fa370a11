#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "safe_manip/env.hpp"
#include "safe_manip/geometry.hpp"
#include "safe_manip/toml_lite.hpp"

namespace safe_manip {

struct PointMassModel {
  double mass = 1.0;
  double dt = 0.05;
  double v_max = 0.5;
  double f_max = 5.0;
};

PointMassModel model_from_scenario(const ScenarioConfig& scenario);

struct MpcState {
  Vec3 pos;
  Vec3 vel;
};

// Solver weights and tolerances. h_margin tightens only the slack
// activation threshold (h_min + h_margin); feasibility is always judged
// against h_min - feas_tol on the exact constraint.
struct MpcProblem {
  int horizon = 8;
  double w_goal = 10.0;
  Vec3 w_force{0.01, 0.01, 0.01};
  double w_slack = 1000.0;
  Vec3 w_terminal_vel{1.0, 1.0, 1.0};
  double alpha = 300.0;
  double h_min = 0.5;
  double h_margin = 0.02;
  double feas_tol = 1e-3;
  int max_iters = 100;
  double grad_tol = 1e-6;
  double cost_tol = 1e-10;
  bool actuate_z = true;  // false: force z channel pinned to zero
};

// Per-solve data: the tracked goal and the predicted obstacle boxes for
// stages 1..horizon.
struct MpcParams {
  Vec3 goal;
  std::vector<std::vector<ObstacleState>> obstacle_stages;
  Vec3 robot_half_extents;
};

struct SolverDiag {
  int iterations = 0;
  double grad_norm = 0.0;
  double final_cost = 0.0;
  std::vector<double> cost_trace;
};

struct MpcSolution {
  Eigen::Matrix3Xd controls;        // force per stage, columns 1..horizon
  std::vector<MpcState> predicted;  // states 0..horizon
  bool feasible = false;
  double max_violation = 0.0;
  double cost = 0.0;
  SolverDiag diag;
};

// Clamped semi-implicit Euler step of the point mass under a force.
MpcState dynamics_step(const PointMassModel& model, const MpcState& state, const Vec3& force);

// Boltzmann smooth maximum with overflow-safe shifting: equals the mean at
// alpha = 0 and approaches max as alpha grows; never exceeds the true max.
double smooth_max(const double* xs, int n, double alpha);

// Rectangle avoidance measure: half the max per-axis ratio of center
// distance to summed half-extents; >= 0.5 exactly outside the inflated box.
double constraint_h_exact(const Vec3& pos, const ObstacleState& obstacle, const Vec3& robot_half);
double constraint_h_smooth(const Vec3& pos, const ObstacleState& obstacle, const Vec3& robot_half,
                           double alpha);

// Total single-shooting cost of a control matrix; fills the analytic
// gradient (same shape as controls) when grad is non-null.
double total_cost(const PointMassModel& model, const MpcProblem& problem, const MpcParams& params,
                  const MpcState& init, const Eigen::Matrix3Xd& controls,
                  Eigen::Matrix3Xd* grad = nullptr);

// Exact feasibility over predicted stages 1..horizon: returns (feasible,
// max violation) with violation = max(0, h_min - h_exact).
std::pair<bool, double> check_feasible(const MpcProblem& problem, const MpcParams& params,
                                       const std::vector<MpcState>& predicted);

// Projected gradient descent with backtracking line search from warm (or
// zeros): monotone cost trace, forces clamped to +-f_max, result feasibility
// re-judged on the exact constraint. Throws SolverDiverged on non-finite
// cost.
MpcSolution solve(const PointMassModel& model, const MpcProblem& problem, const MpcParams& params,
                  const MpcState& init, const Eigen::Matrix3Xd* warm = nullptr);

// Receding-horizon warm start: controls shifted one stage, last repeated.
Eigen::Matrix3Xd shifted_warm_start(const MpcSolution& solution);

// Reads the [mpc] table; absent keys keep defaults.
MpcProblem load_mpc_problem(const TomlTable& config, const ScenarioConfig& scenario);

}  // namespace safe_manip
