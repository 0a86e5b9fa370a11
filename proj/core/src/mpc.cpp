#include "safe_manip/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "safe_manip/errors.hpp"

namespace safe_manip {

PointMassModel model_from_scenario(const ScenarioConfig& scenario) {
  return {scenario.mass, scenario.dt, scenario.v_max, scenario.f_max};
}

MpcState dynamics_step(const PointMassModel& model, const MpcState& state, const Vec3& force) {
  MpcState next;
  for (int i = 0; i < 3; ++i) {
    next.vel[i] = std::clamp(state.vel[i] + force[i] / model.mass * model.dt, -model.v_max,
                             model.v_max);
    next.pos[i] = state.pos[i] + next.vel[i] * model.dt;
  }
  return next;
}

double smooth_max(const double* xs, int n, double alpha) {
  double m = xs[0];
  for (int i = 1; i < n; ++i) m = std::max(m, xs[i]);
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = std::exp(alpha * (xs[i] - m));
    num += xs[i] * e;
    den += e;
  }
  return num / den;
}

namespace {

// Per-axis ratios of the rectangle measure plus the smooth value and its
// gradient with respect to position.
struct HSmooth {
  double h;
  Vec3 dh_dpos;
};

HSmooth h_smooth_grad(const Vec3& pos, const ObstacleState& obstacle, const Vec3& robot_half,
                      double alpha) {
  double r[3], sgn[3], denom[3];
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const double d = pos[i] - obstacle.center[i];
    denom[i] = obstacle.half_extents[i] + robot_half[i];
    r[i] = std::abs(d) / denom[i];
    sgn[i] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    m = std::max(m, r[i]);
  }
  double e[3], num = 0.0, den = 0.0;
  for (int i = 0; i < 3; ++i) {
    e[i] = std::exp(alpha * (r[i] - m));
    num += r[i] * e[i];
    den += e[i];
  }
  const double s = num / den;
  HSmooth out;
  out.h = 0.5 * s;
  for (int i = 0; i < 3; ++i) {
    const double ds_dri = e[i] * (1.0 + alpha * (r[i] - s)) / den;
    out.dh_dpos[i] = 0.5 * ds_dri * sgn[i] / denom[i];
  }
  return out;
}

}  // namespace

double constraint_h_exact(const Vec3& pos, const ObstacleState& obstacle, const Vec3& robot_half) {
  double m = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double denom = obstacle.half_extents[i] + robot_half[i];
    m = std::max(m, std::abs(pos[i] - obstacle.center[i]) / denom);
  }
  return 0.5 * m;
}

double constraint_h_smooth(const Vec3& pos, const ObstacleState& obstacle, const Vec3& robot_half,
                           double alpha) {
  double r[3];
  for (int i = 0; i < 3; ++i) {
    r[i] = std::abs(pos[i] - obstacle.center[i]) / (obstacle.half_extents[i] + robot_half[i]);
  }
  return 0.5 * smooth_max(r, 3, alpha);
}

double total_cost(const PointMassModel& model, const MpcProblem& problem, const MpcParams& params,
                  const MpcState& init, const Eigen::Matrix3Xd& controls,
                  Eigen::Matrix3Xd* grad) {
  const int horizon = problem.horizon;
  if (controls.cols() != horizon) throw ShapeError("total_cost: controls do not match horizon");
  if (static_cast<int>(params.obstacle_stages.size()) != horizon) {
    throw ShapeError("total_cost: obstacle stages do not match horizon");
  }
  const double h_act = problem.h_min + problem.h_margin;

  // Forward rollout, retaining what the adjoint pass needs.
  std::vector<MpcState> states(static_cast<std::size_t>(horizon) + 1);
  std::vector<Vec3> vel_mask(static_cast<std::size_t>(horizon));  // 0 where clamp active
  states[0] = init;
  double cost = 0.0;
  std::vector<Vec3> stage_pos_grad(static_cast<std::size_t>(horizon), Vec3{0, 0, 0});
  for (int k = 1; k <= horizon; ++k) {
    const Vec3 u{controls(0, k - 1), controls(1, k - 1), controls(2, k - 1)};
    const MpcState& prev = states[static_cast<std::size_t>(k) - 1];
    MpcState cur;
    Vec3 mask;
    for (int i = 0; i < 3; ++i) {
      const double v_raw = prev.vel[i] + u[i] / model.mass * model.dt;
      const bool clamped = v_raw > model.v_max || v_raw < -model.v_max;
      cur.vel[i] = std::clamp(v_raw, -model.v_max, model.v_max);
      mask[i] = clamped ? 0.0 : 1.0;
      cur.pos[i] = prev.pos[i] + cur.vel[i] * model.dt;
    }
    states[static_cast<std::size_t>(k)] = cur;
    vel_mask[static_cast<std::size_t>(k) - 1] = mask;

    const Vec3 diff = cur.pos - params.goal;
    cost += problem.w_goal * (diff.x * diff.x + diff.y * diff.y + diff.z * diff.z);
    Vec3 pgrad = 2.0 * problem.w_goal * diff;

    for (int i = 0; i < 3; ++i) cost += problem.w_force[i] * u[i] * u[i];

    for (const auto& obstacle : params.obstacle_stages[static_cast<std::size_t>(k) - 1]) {
      const HSmooth hs =
          h_smooth_grad(cur.pos, obstacle, params.robot_half_extents, problem.alpha);
      const double xi = std::max(0.0, h_act - hs.h);
      if (xi > 0.0) {
        cost += problem.w_slack * xi * xi;
        pgrad += (-2.0 * problem.w_slack * xi) * hs.dh_dpos;
      }
    }
    stage_pos_grad[static_cast<std::size_t>(k) - 1] = pgrad;
  }
  const Vec3& v_term = states[static_cast<std::size_t>(horizon)].vel;
  for (int i = 0; i < 3; ++i) cost += problem.w_terminal_vel[i] * v_term[i] * v_term[i];

  if (grad != nullptr) {
    grad->resize(3, horizon);
    Vec3 lambda_p{0, 0, 0};  // dJ/dpos_k accumulated from stages > k
    Vec3 lambda_v{0, 0, 0};
    for (int i = 0; i < 3; ++i) lambda_v[i] = 2.0 * problem.w_terminal_vel[i] * v_term[i];
    for (int k = horizon; k >= 1; --k) {
      lambda_p += stage_pos_grad[static_cast<std::size_t>(k) - 1];
      const Vec3& mask = vel_mask[static_cast<std::size_t>(k) - 1];
      const Vec3 u{controls(0, k - 1), controls(1, k - 1), controls(2, k - 1)};
      for (int i = 0; i < 3; ++i) {
        const double gv = lambda_p[i] * model.dt + lambda_v[i];
        (*grad)(i, k - 1) =
            2.0 * problem.w_force[i] * u[i] + mask[i] * gv * model.dt / model.mass;
        lambda_v[i] = mask[i] * gv;
      }
    }
    if (!problem.actuate_z) grad->row(2).setZero();
  }
  return cost;
}

std::pair<bool, double> check_feasible(const MpcProblem& problem, const MpcParams& params,
                                       const std::vector<MpcState>& predicted) {
  if (predicted.size() != params.obstacle_stages.size() + 1) {
    throw ShapeError("check_feasible: predicted states do not match obstacle stages");
  }
  double violation = 0.0;
  for (std::size_t k = 1; k < predicted.size(); ++k) {
    for (const auto& obstacle : params.obstacle_stages[k - 1]) {
      const double h =
          constraint_h_exact(predicted[k].pos, obstacle, params.robot_half_extents);
      violation = std::max(violation, problem.h_min - h);
    }
  }
  violation = std::max(violation, 0.0);
  return {violation <= problem.feas_tol, violation};
}

namespace {

std::vector<MpcState> rollout(const PointMassModel& model, const MpcState& init,
                              const Eigen::Matrix3Xd& controls) {
  std::vector<MpcState> states(static_cast<std::size_t>(controls.cols()) + 1);
  states[0] = init;
  for (Eigen::Index k = 0; k < controls.cols(); ++k) {
    states[static_cast<std::size_t>(k) + 1] =
        dynamics_step(model, states[static_cast<std::size_t>(k)],
                      {controls(0, k), controls(1, k), controls(2, k)});
  }
  return states;
}

void project(Eigen::Matrix3Xd& controls, const MpcProblem& problem, double f_max) {
  for (Eigen::Index k = 0; k < controls.cols(); ++k) {
    for (int i = 0; i < 3; ++i) controls(i, k) = std::clamp(controls(i, k), -f_max, f_max);
  }
  if (!problem.actuate_z) controls.row(2).setZero();
}

}  // namespace

MpcSolution solve(const PointMassModel& model, const MpcProblem& problem, const MpcParams& params,
                  const MpcState& init, const Eigen::Matrix3Xd* warm) {
  const int horizon = problem.horizon;
  Eigen::Matrix3Xd u = warm != nullptr ? *warm : Eigen::Matrix3Xd::Zero(3, horizon);
  if (u.cols() != horizon) throw ShapeError("solve: warm start does not match horizon");
  project(u, problem, model.f_max);

  MpcSolution sol;
  Eigen::Matrix3Xd grad(3, horizon);
  double cost = total_cost(model, problem, params, init, u, &grad);
  if (!std::isfinite(cost)) throw SolverDiverged("mpc solve: non-finite cost at start");
  sol.diag.cost_trace.push_back(cost);

  double step = 1.0;
  int iters = 0;
  for (; iters < problem.max_iters; ++iters) {
    const double grad_norm = grad.norm();
    sol.diag.grad_norm = grad_norm;
    if (grad_norm < problem.grad_tol) break;

    bool accepted = false;
    bool first_try = true;
    Eigen::Matrix3Xd candidate;
    double cand_cost = 0.0;
    while (step > 1e-14) {
      candidate = u - step * grad;
      project(candidate, problem, model.f_max);
      cand_cost = total_cost(model, problem, params, init, candidate);
      if (!std::isfinite(cand_cost)) throw SolverDiverged("mpc solve: non-finite cost");
      if (cand_cost < cost) {
        accepted = true;
        break;
      }
      first_try = false;
      step *= 0.5;
    }
    if (!accepted) break;

    const double improvement = cost - cand_cost;
    u = candidate;
    cost = cand_cost;
    sol.diag.cost_trace.push_back(cost);
    total_cost(model, problem, params, init, u, &grad);
    if (first_try) step = std::min(step * 2.0, 1e6);
    if (improvement < problem.cost_tol) {
      ++iters;
      break;
    }
  }

  sol.controls = u;
  sol.predicted = rollout(model, init, u);
  sol.cost = cost;
  sol.diag.iterations = iters;
  sol.diag.final_cost = cost;
  sol.diag.grad_norm = grad.norm();
  const auto [feasible, violation] = check_feasible(problem, params, sol.predicted);
  sol.feasible = feasible;
  sol.max_violation = violation;
  return sol;
}

Eigen::Matrix3Xd shifted_warm_start(const MpcSolution& solution) {
  const Eigen::Index n = solution.controls.cols();
  Eigen::Matrix3Xd shifted(3, n);
  if (n == 0) return shifted;
  shifted.leftCols(n - 1) = solution.controls.rightCols(n - 1);
  shifted.col(n - 1) = solution.controls.col(n - 1);
  return shifted;
}

MpcProblem load_mpc_problem(const TomlTable& config, const ScenarioConfig& scenario) {
  MpcProblem p;
  p.actuate_z = scenario.actuate_z;
  const TomlTable* t = config.table("mpc");
  if (t == nullptr) return p;
  p.horizon = static_cast<int>(t->number_or("horizon", p.horizon));
  p.w_goal = t->number_or("w_goal", p.w_goal);
  if (t->has("w_force")) {
    const auto a = t->number_array("w_force");
    if (a.size() != 3) throw ConfigError("[mpc] w_force must have 3 elements");
    p.w_force = {a[0], a[1], a[2]};
  }
  p.w_slack = t->number_or("w_slack", p.w_slack);
  if (t->has("w_terminal_vel")) {
    const auto a = t->number_array("w_terminal_vel");
    if (a.size() != 3) throw ConfigError("[mpc] w_terminal_vel must have 3 elements");
    p.w_terminal_vel = {a[0], a[1], a[2]};
  }
  p.alpha = t->number_or("alpha", p.alpha);
  p.h_margin = t->number_or("h_margin", p.h_margin);
  p.feas_tol = t->number_or("feas_tol", p.feas_tol);
  p.max_iters = static_cast<int>(t->number_or("max_iters", p.max_iters));
  p.grad_tol = t->number_or("grad_tol", p.grad_tol);
  p.cost_tol = t->number_or("cost_tol", p.cost_tol);
  if (p.horizon <= 0) throw ConfigError("[mpc] horizon must be > 0");
  if (!(p.alpha > 0.0)) throw ConfigError("[mpc] alpha must be > 0");
  if (p.feas_tol < 0.0 || p.h_margin < 0.0) throw ConfigError("[mpc] tolerances must be >= 0");
  return p;
}

}  // namespace safe_manip
