#include <doctest.h>

#include <cmath>

#include "safe_manip/env.hpp"
#include "safe_manip/errors.hpp"
#include "safe_manip/mpc.hpp"
#include "test_util.hpp"

using namespace safe_manip;

namespace {

ObstacleState box_at(const Vec3& center, const Vec3& half) {
  ObstacleState o;
  o.center = center;
  o.half_extents = half;
  o.axis = 1;
  o.track_min = o.track_max = center.y;
  return o;
}

// Stationary obstacle repeated over every stage.
MpcParams static_params(int horizon, const Vec3& goal, const ObstacleState& o,
                        const Vec3& robot_half) {
  MpcParams p;
  p.goal = goal;
  p.robot_half_extents = robot_half;
  p.obstacle_stages.assign(static_cast<std::size_t>(horizon), {o});
  return p;
}

PointMassModel table_model() {
  PointMassModel m;
  m.mass = 1.0;
  m.dt = 0.05;
  m.v_max = 0.5;
  m.f_max = 5.0;
  return m;
}

Eigen::Matrix3Xd random_controls(const PointMassModel& model, int horizon, Rng& rng) {
  Eigen::Matrix3Xd u(3, horizon);
  for (int k = 0; k < horizon; ++k) {
    for (int i = 0; i < 3; ++i) u(i, k) = rng.uniform(-model.f_max, model.f_max);
  }
  return u;
}

}  // namespace

TEST_CASE("smooth max: frozen value, bounds, convergence") {
  const double two[] = {0.0, 1.0};
  CHECK(smooth_max(two, 2, 2.0) == doctest::Approx(std::exp(2.0) / (1.0 + std::exp(2.0))));
  CHECK(smooth_max(two, 2, 0.0) == doctest::Approx(0.5));  // mean at alpha 0

  const double xs[] = {0.0, 1.0, 2.0};
  double prev_gap = 1e9;
  for (double alpha : {1.0, 10.0, 100.0}) {
    const double s = smooth_max(xs, 3, alpha);
    CHECK(s <= 2.0);  // never exceeds the true max
    const double gap = std::abs(s - 2.0);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap <= 1e-3);

  // Overflow-safe for large inputs.
  const double big[] = {1e4, 2e4};
  CHECK(std::isfinite(smooth_max(big, 2, 300.0)));
  CHECK(smooth_max(big, 2, 300.0) == doctest::Approx(2e4));
}

TEST_CASE("exact constraint: level set is the inflated box surface") {
  const ObstacleState o = box_at({0.5, 0.5, 0.1}, {0.1, 0.05, 0.1});
  const Vec3 robot_half{0.02, 0.02, 0.02};
  // Inflated half extents: (0.12, 0.07, 0.12).

  CHECK(constraint_h_exact({0.5 + 0.12, 0.5, 0.1}, o, robot_half) == doctest::Approx(0.5));
  CHECK(constraint_h_exact({0.5, 0.5 - 0.07, 0.1}, o, robot_half) == doctest::Approx(0.5));
  CHECK(constraint_h_exact({0.5, 0.5, 0.1}, o, robot_half) == doctest::Approx(0.0));
  CHECK(constraint_h_exact({0.5 + 0.24, 0.5, 0.1}, o, robot_half) == doctest::Approx(1.0));
  CHECK(constraint_h_exact({0.5 + 0.06, 0.5, 0.1}, o, robot_half) ==
        doctest::Approx(0.25));  // halfway to the x face

  // h >= 0.5 exactly when the object does not strictly overlap.
  Rng rng(4);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 p{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 0.3)};
    const bool overlap = aabb_overlap(p, robot_half, o.center, o.half_extents);
    CHECK((constraint_h_exact(p, o, robot_half) < 0.5) == overlap);
  }
}

TEST_CASE("smooth constraint tracks the exact one away from face ties") {
  const ObstacleState o = box_at({0.5, 0.5, 0.1}, {0.08, 0.05, 0.06});
  const Vec3 robot_half{0.02, 0.02, 0.02};
  Rng rng(9);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 p{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 0.3)};
    const double exact = constraint_h_exact(p, o, robot_half);
    const double smooth = constraint_h_smooth(p, o, robot_half, 300.0);
    CHECK(smooth <= exact + 1e-12);
    // The per-axis ratios; the Boltzmann gap shrinks with their spread.
    const Vec3 inflated = o.half_extents + robot_half;
    double r[3];
    for (int a = 0; a < 3; ++a) r[a] = std::abs(p[a] - o.center[a]) / inflated[a];
    std::sort(r, r + 3);
    if (r[2] - r[1] > 0.2) CHECK(smooth == doctest::Approx(exact).epsilon(1e-3));
  }
}

TEST_CASE("solver dynamics replicate the simulator integrator bitwise") {
  const ScenarioConfig s = test_util::tiny_scenario();
  const PointMassModel model = model_from_scenario(s);
  CHECK(model.dt == s.dt);
  CHECK(model.f_max == s.f_max);

  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    Vec3 pos{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), 0.02};
    Vec3 vel{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 0.0};
    const Vec3 force{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), 0.0};

    const MpcState next = dynamics_step(model, MpcState{pos, vel}, force);
    integrate_force(s, pos, vel, force);  // env-side update in place
    CHECK(next.pos.x == pos.x);
    CHECK(next.pos.y == pos.y);
    CHECK(next.vel.x == vel.x);
    CHECK(next.vel.y == vel.y);
  }
}

TEST_CASE("total cost gradient matches central finite differences") {
  const PointMassModel model = table_model();
  MpcProblem problem;
  problem.horizon = 6;

  int instances = 0;
  for (int trial = 0; trial < 30; ++trial) {
    Rng rng(500 + trial);
    const ObstacleState o =
        box_at({rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7), 0.02}, {0.05, 0.08, 0.02});
    const MpcParams params = static_params(
        problem.horizon, {rng.uniform(0.5, 0.9), rng.uniform(0.2, 0.8), 0.02}, o,
        {0.02, 0.02, 0.02});
    const MpcState init{{rng.uniform(0.05, 0.3), rng.uniform(0.2, 0.8), 0.02},
                        {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), 0.0}};
    Eigen::Matrix3Xd u = random_controls(model, problem.horizon, rng);

    Eigen::Matrix3Xd grad(3, problem.horizon);
    total_cost(model, problem, params, init, u, &grad);

    const double h = 1e-5;
    Eigen::Matrix3Xd fd(3, problem.horizon);
    for (int k = 0; k < problem.horizon; ++k) {
      for (int i = 0; i < 3; ++i) {
        Eigen::Matrix3Xd up = u, down = u;
        up(i, k) += h;
        down(i, k) -= h;
        fd(i, k) = (total_cost(model, problem, params, init, up) -
                    total_cost(model, problem, params, init, down)) /
                   (2.0 * h);
      }
    }
    const double err = (fd - grad).norm() / std::max(1.0, fd.norm());
    CHECK(err <= 1e-5);
    ++instances;
  }
  CHECK(instances == 30);
}

TEST_CASE("solve: monotone trace, bounded forces, deterministic, feasible when clear") {
  const PointMassModel model = table_model();
  MpcProblem problem;
  problem.horizon = 8;
  problem.actuate_z = false;

  // Obstacle far from the straight path.
  const MpcParams params = static_params(8, {0.5, 0.5, 0.02},
                                         box_at({0.9, 0.9, 0.02}, {0.03, 0.03, 0.02}),
                                         {0.02, 0.02, 0.02});
  const MpcState init{{0.3, 0.5, 0.02}, {0.0, 0.0, 0.0}};

  const MpcSolution a = solve(model, problem, params, init);
  const MpcSolution b = solve(model, problem, params, init);
  CHECK(a.feasible);
  CHECK(a.max_violation == 0.0);
  REQUIRE(a.controls.cols() == 8);
  REQUIRE(a.predicted.size() == 9);
  CHECK(a.controls.cwiseAbs().maxCoeff() <= model.f_max + 1e-12);
  CHECK(a.controls.row(2).cwiseAbs().maxCoeff() == 0.0);  // z pinned in 2D
  for (std::size_t i = 1; i < a.diag.cost_trace.size(); ++i) {
    CHECK(a.diag.cost_trace[i] <= a.diag.cost_trace[i - 1] + 1e-12);
  }
  CHECK(test_util::exact_eq(a.controls, b.controls));  // bitwise repeatable

  // The plan makes progress toward the goal.
  const double d0 = dist(init.pos, params.goal);
  const double dN = dist(a.predicted.back().pos, params.goal);
  CHECK(dN < 0.5 * d0);

  // Feasibility is judged on the exact constraint over the returned plan.
  const auto [ok, violation] = check_feasible(problem, params, a.predicted);
  CHECK(ok == a.feasible);
  CHECK(violation == a.max_violation);
}

TEST_CASE("solve reports infeasibility when boxed in") {
  const PointMassModel model = table_model();
  MpcProblem problem;
  problem.horizon = 8;
  problem.actuate_z = false;

  // A huge box covering the whole neighborhood: no feasible stage exists.
  const MpcParams params = static_params(8, {0.9, 0.5, 0.02},
                                         box_at({0.5, 0.5, 0.02}, {0.4, 0.4, 0.1}),
                                         {0.02, 0.02, 0.02});
  const MpcState init{{0.5, 0.5, 0.02}, {0.0, 0.0, 0.0}};
  const MpcSolution sol = solve(model, problem, params, init);
  CHECK_FALSE(sol.feasible);
  CHECK(sol.max_violation > 0.0);
}

TEST_CASE("warm start shifts one stage and repeats the last") {
  const PointMassModel model = table_model();
  MpcProblem problem;
  problem.horizon = 5;
  const MpcParams params = static_params(5, {0.8, 0.5, 0.02},
                                         box_at({0.9, 0.9, 0.02}, {0.03, 0.03, 0.02}),
                                         {0.02, 0.02, 0.02});
  const MpcSolution sol = solve(model, problem, params, {{0.3, 0.5, 0.02}, {0, 0, 0}});
  const Eigen::Matrix3Xd shifted = shifted_warm_start(sol);
  REQUIRE(shifted.cols() == 5);
  for (int k = 0; k < 4; ++k) {
    CHECK(test_util::exact_eq(Eigen::MatrixXd(shifted.col(k)),
                              Eigen::MatrixXd(sol.controls.col(k + 1))));
  }
  CHECK(test_util::exact_eq(Eigen::MatrixXd(shifted.col(4)),
                            Eigen::MatrixXd(sol.controls.col(4))));
}

TEST_CASE("z actuation gate controls the third force row") {
  const PointMassModel model = table_model();
  MpcProblem problem;
  problem.horizon = 6;
  problem.actuate_z = true;

  // Goal above the table: flying is required and allowed.
  MpcParams params = static_params(6, {0.4, 0.5, 0.15},
                                   box_at({0.9, 0.9, 0.02}, {0.03, 0.03, 0.02}),
                                   {0.02, 0.02, 0.02});
  const MpcState init{{0.35, 0.5, 0.02}, {0.0, 0.0, 0.0}};
  const MpcSolution fly = solve(model, problem, params, init);
  CHECK(fly.controls.row(2).cwiseAbs().maxCoeff() > 0.0);
  CHECK(fly.predicted.back().pos.z > 0.05);
}

TEST_CASE("mpc problem loads and validates from the config table") {
  const auto& root = test_util::config_root();
  const ScenarioConfig s = test_util::scenario("DynamicSquareObstacles");
  const MpcProblem p = load_mpc_problem(root, s);
  CHECK(p.horizon == 8);
  CHECK(p.alpha == 300.0);
  CHECK_FALSE(p.actuate_z);
  const ScenarioConfig lifted = test_util::scenario("DynamicLiftedObstacles");
  CHECK(load_mpc_problem(root, lifted).actuate_z);

  const auto bad = TomlTable::parse_string("[mpc]\nhorizon = 0\n", "inline");
  CHECK_THROWS_AS(load_mpc_problem(bad, s), ConfigError);
}
