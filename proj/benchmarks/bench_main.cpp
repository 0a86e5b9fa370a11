// Microbenchmarks for the latency-critical paths: the per-tick solver call
// (cold and warm started), network inference, and the simulator step.
#include <benchmark/benchmark.h>

#include "safe_manip/controller.hpp"
#include "safe_manip/env.hpp"
#include "safe_manip/eval.hpp"
#include "safe_manip/mpc.hpp"
#include "safe_manip/train.hpp"

using namespace safe_manip;

namespace {

const TomlTable& config_root() {
  static const TomlTable root = TomlTable::parse_file(BENCH_CONFIG_PATH);
  return root;
}

ScenarioConfig rect_scenario() {
  static const ScenarioConfig s = load_scenario(config_root(), "DynamicRectObstacles");
  return s;
}

struct SolveSetup {
  ScenarioConfig scenario = rect_scenario();
  MpcProblem problem = load_mpc_problem(config_root(), scenario);
  PointMassModel model = model_from_scenario(scenario);
  EnvState state;
  Vec3 goal;
  MpcParams params;

  explicit SolveSetup(std::uint64_t seed) {
    ResetResult init = reset(scenario, seed);
    state = init.state;
    goal = init.goal;
    params.goal = goal;
    params.obstacle_stages = predict_obstacles(state, problem.horizon, scenario.dt);
    params.robot_half_extents = scenario.object_half_extents;
  }
};

void BM_SolveCold(benchmark::State& bench) {
  SolveSetup setup(7);
  const MpcState init{setup.state.object_pos, setup.state.object_vel};
  for (auto _ : bench) {
    benchmark::DoNotOptimize(solve(setup.model, setup.problem, setup.params, init));
  }
}
BENCHMARK(BM_SolveCold)->Unit(benchmark::kMillisecond);

void BM_SolveWarm(benchmark::State& bench) {
  SolveSetup setup(7);
  const MpcState init{setup.state.object_pos, setup.state.object_vel};
  const MpcSolution first = solve(setup.model, setup.problem, setup.params, init);
  const Eigen::Matrix3Xd warm = shifted_warm_start(first);
  for (auto _ : bench) {
    benchmark::DoNotOptimize(solve(setup.model, setup.problem, setup.params, init, &warm));
  }
}
BENCHMARK(BM_SolveWarm)->Unit(benchmark::kMillisecond);

void BM_CostGradient(benchmark::State& bench) {
  SolveSetup setup(7);
  const MpcState init{setup.state.object_pos, setup.state.object_vel};
  Eigen::Matrix3Xd u = Eigen::Matrix3Xd::Zero(3, setup.problem.horizon);
  Eigen::Matrix3Xd grad(3, setup.problem.horizon);
  for (auto _ : bench) {
    benchmark::DoNotOptimize(
        total_cost(setup.model, setup.problem, setup.params, init, u, &grad));
  }
}
BENCHMARK(BM_CostGradient);

void BM_PolicyForward(benchmark::State& bench) {
  const ScenarioConfig s = rect_scenario();
  const DdpgAgent agent = make_agent(s, DdpgConfig{}, 3);
  ResetResult init = reset(s, 7);
  const Eigen::VectorXd obs = observe(init.state, init.goal, s);
  Rng rng(0);
  for (auto _ : bench) {
    benchmark::DoNotOptimize(select_action(agent, obs, false, rng));
  }
}
BENCHMARK(BM_PolicyForward);

void BM_EnvStep(benchmark::State& bench) {
  const ScenarioConfig s = rect_scenario();
  ResetResult init = reset(s, 7);
  const Vec3 action{0.3, -0.2, 0.0};
  for (auto _ : bench) {
    benchmark::DoNotOptimize(step(s, init.state, action, init.goal));
  }
}
BENCHMARK(BM_EnvStep);

void BM_ControllerTick(benchmark::State& bench) {
  const ScenarioConfig s = rect_scenario();
  const MpcProblem problem = load_mpc_problem(config_root(), s);
  ResetResult init = reset(s, 7);
  ControllerState ctrl;
  for (auto _ : bench) {
    benchmark::DoNotOptimize(
        act(nullptr, s, problem, ControllerKind::kMpc, ctrl, init.state, init.goal));
  }
}
BENCHMARK(BM_ControllerTick)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
