#include "safe_manip/trajlog.hpp"

#include <fstream>
#include <json.hpp>

#include "safe_manip/errors.hpp"

namespace safe_manip {

namespace {

using Json = nlohmann::ordered_json;

Json vec_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

Vec3 vec_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw std::runtime_error("expected a 3-vector");
  return Vec3{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json obstacle_json(const ObstacleState& o) {
  Json j;
  j["center"] = vec_json(o.center);
  j["half"] = vec_json(o.half_extents);
  j["vel"] = vec_json(o.velocity);
  j["axis"] = o.axis;
  j["track"] = Json::array({o.track_min, o.track_max});
  return j;
}

ObstacleState obstacle_from(const nlohmann::json& j) {
  ObstacleState o;
  o.center = vec_from(j.at("center"));
  o.half_extents = vec_from(j.at("half"));
  o.velocity = vec_from(j.at("vel"));
  o.axis = j.at("axis").get<int>();
  o.track_min = j.at("track")[0].get<double>();
  o.track_max = j.at("track")[1].get<double>();
  return o;
}

Json obstacles_json(const std::vector<ObstacleState>& obs) {
  Json arr = Json::array();
  for (const auto& o : obs) arr.push_back(obstacle_json(o));
  return arr;
}

std::vector<ObstacleState> obstacles_from(const nlohmann::json& j) {
  std::vector<ObstacleState> out;
  for (const auto& entry : j) out.push_back(obstacle_from(entry));
  return out;
}

}  // namespace

void write_trajectory_log(const std::string& path, const ScenarioConfig& scenario,
                          const std::string& controller, std::uint64_t seed,
                          const Trajectory& traj, const std::vector<ControlDiag>& diags) {
  if (traj.states.empty()) throw IoError("trajectory log: empty trajectory");
  if (!diags.empty() && static_cast<int>(diags.size()) != traj.horizon()) {
    throw IoError("trajectory log: diagnostics do not match the step count");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");

  const EnvState& s0 = traj.states.front();
  Json meta;
  meta["version"] = 1;
  meta["scenario"] = scenario.name;
  meta["controller"] = controller;
  meta["seed"] = seed;
  meta["goal"] = vec_json(traj.goal);
  meta["dt"] = scenario.dt;
  meta["success_radius"] = scenario.success_radius;
  meta["workspace_lo"] = vec_json(scenario.workspace_min);
  meta["workspace_hi"] = vec_json(scenario.workspace_max);
  meta["object_half"] = vec_json(scenario.object_half_extents);
  meta["start_pos"] = vec_json(s0.object_pos);
  meta["start_vel"] = vec_json(s0.object_vel);
  meta["start_obstacles"] = obstacles_json(s0.obstacles);
  out << meta.dump() << "\n";

  for (int t = 0; t < traj.horizon(); ++t) {
    const EnvState& next = traj.states[static_cast<std::size_t>(t) + 1];
    Json rec;
    rec["t"] = t;
    rec["pos"] = vec_json(next.object_pos);
    rec["vel"] = vec_json(next.object_vel);
    rec["obstacles"] = obstacles_json(next.obstacles);
    rec["action"] = vec_json(traj.actions[static_cast<std::size_t>(t)]);
    rec["reward"] = traj.rewards[static_cast<std::size_t>(t)];
    rec["collided"] = static_cast<bool>(traj.collided[static_cast<std::size_t>(t)]);
    if (!diags.empty()) {
      const ControlDiag& d = diags[static_cast<std::size_t>(t)];
      Json ctrl;
      ctrl["mode"] = mode_name(d.mode);
      ctrl["g_t"] = vec_json(d.g_t);
      ctrl["fallback_m"] = d.fallback_m;
      ctrl["solver_ran"] = d.solver_ran;
      ctrl["feasible"] = d.feasible;
      ctrl["violation"] = d.violation;
      if (d.solver_ran) {
        ctrl["iterations"] = d.solver.iterations;
        ctrl["cost"] = d.solver.final_cost;
        Json pred = Json::array();
        for (const auto& p : d.predicted) pred.push_back(vec_json(p));
        ctrl["predicted"] = std::move(pred);
      }
      rec["ctrl"] = std::move(ctrl);
    }
    out << rec.dump() << "\n";
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

TrajectoryLog read_trajectory_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");

  TrajectoryLog log;
  std::string line;
  int lineno = 0;
  bool have_meta = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      if (!have_meta) {
        const int version = j.at("version").get<int>();
        if (version != 1) throw std::runtime_error("unsupported log version");
        log.meta.version = version;
        log.meta.scenario = j.at("scenario").get<std::string>();
        log.meta.controller = j.at("controller").get<std::string>();
        log.meta.seed = j.at("seed").get<std::uint64_t>();
        log.meta.goal = vec_from(j.at("goal"));
        log.meta.dt = j.at("dt").get<double>();
        log.meta.success_radius = j.at("success_radius").get<double>();
        log.meta.workspace_lo = vec_from(j.at("workspace_lo"));
        log.meta.workspace_hi = vec_from(j.at("workspace_hi"));
        log.meta.object_half_extents = vec_from(j.at("object_half"));
        log.meta.start_pos = vec_from(j.at("start_pos"));
        log.meta.start_vel = vec_from(j.at("start_vel"));
        log.meta.start_obstacles = obstacles_from(j.at("start_obstacles"));
        have_meta = true;
        continue;
      }
      TickRecord rec;
      rec.t = j.at("t").get<int>();
      rec.pos = vec_from(j.at("pos"));
      rec.vel = vec_from(j.at("vel"));
      rec.obstacles = obstacles_from(j.at("obstacles"));
      rec.action = vec_from(j.at("action"));
      rec.reward = j.at("reward").get<double>();
      rec.collided = j.at("collided").get<bool>();
      if (j.contains("ctrl")) {
        const auto& ctrl = j.at("ctrl");
        rec.has_ctrl = true;
        rec.mode = ctrl.at("mode").get<std::string>();
        rec.g_t = vec_from(ctrl.at("g_t"));
        rec.fallback_m = ctrl.at("fallback_m").get<int>();
        rec.solver_ran = ctrl.at("solver_ran").get<bool>();
        rec.feasible = ctrl.at("feasible").get<bool>();
        rec.violation = ctrl.at("violation").get<double>();
        if (rec.solver_ran) {
          rec.solver_iterations = ctrl.at("iterations").get<int>();
          rec.solver_cost = ctrl.at("cost").get<double>();
          for (const auto& p : ctrl.at("predicted")) rec.predicted.push_back(vec_from(p));
        }
      }
      log.ticks.push_back(std::move(rec));
    } catch (const std::exception& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_meta) throw IoError(path + ": empty trajectory log");
  return log;
}

}  // namespace safe_manip
