#include "safe_manip/ddpg.hpp"

#include <algorithm>
#include <cmath>

#include "safe_manip/errors.hpp"

namespace safe_manip {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ShapeError("replay buffer capacity must be > 0");
  data_.reserve(std::min<std::size_t>(capacity, 4096));
}

void ReplayBuffer::push(Transition t) {
  if (size_ < capacity_) {
    data_.push_back(std::move(t));
    ++size_;
  } else {
    data_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

DdpgAgent make_agent(const ScenarioConfig& scenario, const DdpgConfig& cfg, std::uint64_t seed) {
  DdpgAgent agent;
  agent.cfg = cfg;
  agent.obs_dim = observation_size(scenario);
  agent.scenario_name = scenario.name;

  std::vector<int> actor_sizes{agent.obs_dim};
  std::vector<int> critic_sizes{agent.obs_dim + agent.action_dim};
  for (int h : cfg.hidden) {
    actor_sizes.push_back(h);
    critic_sizes.push_back(h);
  }
  actor_sizes.push_back(agent.action_dim);
  critic_sizes.push_back(1);

  Rng rng = Rng::derive(seed, 0x5eed);
  agent.actor = make_mlp(actor_sizes, Mlp::Head::kTanh, rng);
  agent.critic = make_mlp(critic_sizes, Mlp::Head::kIdentity, rng);
  agent.target_actor = agent.actor;
  agent.target_critic = agent.critic;
  agent.actor_opt = make_adam(agent.actor, cfg.actor_lr);
  agent.critic_opt = make_adam(agent.critic, cfg.critic_lr);
  return agent;
}

Vec3 select_action(const DdpgAgent& agent, const Eigen::VectorXd& obs_goal, bool explore,
                   Rng& rng) {
  const Eigen::VectorXd out = forward(agent.actor, obs_goal) * agent.cfg.action_scale;
  Vec3 a{out[0], out[1], out[2]};
  if (explore) {
    for (int i = 0; i < 3; ++i) a[i] += rng.normal(0.0, agent.cfg.noise_sigma);
  }
  return clamp(a, -1.0, 1.0);
}

Eigen::VectorXd value_batch(const DdpgAgent& agent, const Eigen::MatrixXd& obs_goals) {
  const Eigen::MatrixXd actions = forward(agent.actor, obs_goals) * agent.cfg.action_scale;
  Eigen::MatrixXd critic_in(agent.obs_dim + agent.action_dim, obs_goals.cols());
  critic_in.topRows(agent.obs_dim) = obs_goals;
  critic_in.bottomRows(agent.action_dim) = actions;
  Eigen::VectorXd q = forward(agent.critic, critic_in).row(0);
  const double floor = agent.value_floor();
  for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = std::clamp(q[i], floor, 0.0);
  return q;
}

double value_of(const DdpgAgent& agent, const Eigen::VectorXd& obs_goal) {
  return value_batch(agent, Eigen::MatrixXd(obs_goal))[0];
}

UpdateDiag update(DdpgAgent& agent, const ReplayBuffer& buffer, Rng& rng) {
  UpdateDiag diag;
  const int batch = agent.cfg.batch_size;
  if (buffer.size() < static_cast<std::size_t>(batch)) {
    diag.skipped = true;
    return diag;
  }

  const int obs_dim = agent.obs_dim;
  const int act_dim = agent.action_dim;
  Eigen::MatrixXd obs(obs_dim, batch), next_obs(obs_dim, batch), actions(act_dim, batch);
  Eigen::VectorXd rewards(batch);
  for (int b = 0; b < batch; ++b) {
    const auto& t = buffer.at(static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(buffer.size()) - 1)));
    obs.col(b) = t.obs;
    next_obs.col(b) = t.next_obs;
    actions.col(b) = Eigen::Vector3d(t.action.x, t.action.y, t.action.z);
    rewards[b] = t.reward;
  }

  // Clipped TD targets from the target nets.
  const Eigen::MatrixXd next_actions =
      forward(agent.target_actor, next_obs) * agent.cfg.action_scale;
  Eigen::MatrixXd target_in(obs_dim + act_dim, batch);
  target_in.topRows(obs_dim) = next_obs;
  target_in.bottomRows(act_dim) = next_actions;
  const Eigen::VectorXd next_q = forward(agent.target_critic, target_in).row(0);
  const double floor = agent.value_floor();
  Eigen::VectorXd targets(batch);
  for (int b = 0; b < batch; ++b) {
    targets[b] = std::clamp(rewards[b] + agent.cfg.gamma * next_q[b], floor, 0.0);
  }
  diag.mean_target = targets.mean();

  // Critic MSE step.
  Eigen::MatrixXd critic_in(obs_dim + act_dim, batch);
  critic_in.topRows(obs_dim) = obs;
  critic_in.bottomRows(act_dim) = actions;
  ForwardCache critic_cache;
  const Eigen::VectorXd q = forward(agent.critic, critic_in, &critic_cache).row(0);
  const Eigen::VectorXd err = q - targets;
  diag.critic_loss = err.squaredNorm() / batch;
  Eigen::MatrixXd d_q(1, batch);
  d_q.row(0) = (2.0 / batch) * err;
  MlpGrads critic_grads;
  backward(agent.critic, critic_cache, d_q, &critic_grads);
  adam_step(agent.critic, critic_grads, agent.critic_opt);

  // Actor step: ascend mean Q(s, pi(s)); the critic supplies the gradient
  // through its action input, its own parameters stay fixed here.
  ForwardCache actor_cache;
  const Eigen::MatrixXd pi = forward(agent.actor, obs, &actor_cache) * agent.cfg.action_scale;
  Eigen::MatrixXd actor_critic_in(obs_dim + act_dim, batch);
  actor_critic_in.topRows(obs_dim) = obs;
  actor_critic_in.bottomRows(act_dim) = pi;
  ForwardCache q_cache;
  const Eigen::VectorXd q_pi = forward(agent.critic, actor_critic_in, &q_cache).row(0);
  diag.actor_loss = -q_pi.mean();
  Eigen::MatrixXd d_q_pi = Eigen::MatrixXd::Constant(1, batch, -1.0 / batch);
  const Eigen::MatrixXd d_critic_in = backward(agent.critic, q_cache, d_q_pi, nullptr);
  const Eigen::MatrixXd d_pi = d_critic_in.bottomRows(act_dim) * agent.cfg.action_scale;
  MlpGrads actor_grads;
  backward(agent.actor, actor_cache, d_pi, &actor_grads);
  adam_step(agent.actor, actor_grads, agent.actor_opt);

  soft_update(agent.target_actor, agent.actor, agent.cfg.tau);
  soft_update(agent.target_critic, agent.critic, agent.cfg.tau);
  return diag;
}

}  // namespace safe_manip
