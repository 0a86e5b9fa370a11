#include <fstream>
#include <json.hpp>

#include "safe_manip/ddpg.hpp"
#include "safe_manip/errors.hpp"

namespace safe_manip {

namespace {

using Json = nlohmann::ordered_json;

constexpr int kCheckpointVersion = 1;

Json net_to_json(const Mlp& net) {
  Json j;
  j["layer_sizes"] = net.layer_sizes;
  j["head"] = net.head == Mlp::Head::kTanh ? "tanh" : "identity";
  Json weights = Json::array();
  Json biases = Json::array();
  for (int l = 0; l < net.layer_count(); ++l) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(net.weights[l].size()));
    // Row-major flattening.
    for (Eigen::Index r = 0; r < net.weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < net.weights[l].cols(); ++c) w.push_back(net.weights[l](r, c));
    }
    weights.push_back(w);
    biases.push_back(std::vector<double>(net.biases[l].data(),
                                         net.biases[l].data() + net.biases[l].size()));
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  return j;
}

Mlp net_from_json(const Json& j) {
  Mlp net;
  net.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  const std::string head = j.at("head").get<std::string>();
  if (head == "tanh") {
    net.head = Mlp::Head::kTanh;
  } else if (head == "identity") {
    net.head = Mlp::Head::kIdentity;
  } else {
    throw ConfigError("checkpoint: unknown head '" + head + "'");
  }
  if (net.layer_sizes.size() < 2) throw ConfigError("checkpoint: bad layer_sizes");
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  if (weights.size() + 1 != net.layer_sizes.size() || biases.size() != weights.size()) {
    throw ConfigError("checkpoint: layer count mismatch");
  }
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    const int rows = net.layer_sizes[l + 1];
    const int cols = net.layer_sizes[l];
    const auto w = weights[l].get<std::vector<double>>();
    const auto b = biases[l].get<std::vector<double>>();
    if (static_cast<int>(w.size()) != rows * cols || static_cast<int>(b.size()) != rows) {
      throw ConfigError("checkpoint: weight shape mismatch at layer " + std::to_string(l));
    }
    Eigen::MatrixXd wm(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) wm(r, c) = w[static_cast<std::size_t>(r) * cols + c];
    }
    net.weights.push_back(std::move(wm));
    net.biases.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), rows));
  }
  return net;
}

Json adam_to_json(const AdamState& opt) {
  Json j;
  j["lr"] = opt.lr;
  j["beta1"] = opt.beta1;
  j["beta2"] = opt.beta2;
  j["eps"] = opt.eps;
  j["step"] = opt.step;
  auto mats = [](const std::vector<Eigen::MatrixXd>& ms) {
    Json out = Json::array();
    for (const auto& m : ms) {
      std::vector<double> flat;
      flat.reserve(static_cast<std::size_t>(m.size()));
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
      }
      out.push_back(flat);
    }
    return out;
  };
  auto vecs = [](const std::vector<Eigen::VectorXd>& vs) {
    Json out = Json::array();
    for (const auto& v : vs) out.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    return out;
  };
  j["m_w"] = mats(opt.m_w);
  j["v_w"] = mats(opt.v_w);
  j["m_b"] = vecs(opt.m_b);
  j["v_b"] = vecs(opt.v_b);
  return j;
}

AdamState adam_from_json(const Json& j, const Mlp& net) {
  AdamState opt = make_adam(net, j.at("lr").get<double>());
  opt.beta1 = j.at("beta1").get<double>();
  opt.beta2 = j.at("beta2").get<double>();
  opt.eps = j.at("eps").get<double>();
  opt.step = j.at("step").get<std::int64_t>();
  auto fill_mats = [&](const Json& src, std::vector<Eigen::MatrixXd>& dst) {
    if (src.size() != dst.size()) throw ConfigError("checkpoint: optimizer state layer mismatch");
    for (std::size_t l = 0; l < dst.size(); ++l) {
      const auto flat = src[l].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(flat.size()) != dst[l].size()) {
        throw ConfigError("checkpoint: optimizer state shape mismatch");
      }
      std::size_t k = 0;
      for (Eigen::Index r = 0; r < dst[l].rows(); ++r) {
        for (Eigen::Index c = 0; c < dst[l].cols(); ++c) dst[l](r, c) = flat[k++];
      }
    }
  };
  auto fill_vecs = [&](const Json& src, std::vector<Eigen::VectorXd>& dst) {
    if (src.size() != dst.size()) throw ConfigError("checkpoint: optimizer state layer mismatch");
    for (std::size_t l = 0; l < dst.size(); ++l) {
      const auto flat = src[l].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(flat.size()) != dst[l].size()) {
        throw ConfigError("checkpoint: optimizer state shape mismatch");
      }
      dst[l] = Eigen::Map<const Eigen::VectorXd>(flat.data(),
                                                 static_cast<Eigen::Index>(flat.size()));
    }
  };
  fill_mats(j.at("m_w"), opt.m_w);
  fill_mats(j.at("v_w"), opt.v_w);
  fill_vecs(j.at("m_b"), opt.m_b);
  fill_vecs(j.at("v_b"), opt.v_b);
  return opt;
}

}  // namespace

std::string checkpoint_to_json(const DdpgAgent& agent) {
  Json j;
  j["version"] = kCheckpointVersion;
  Json manifest;
  manifest["scenario"] = agent.scenario_name;
  manifest["obs_dim"] = agent.obs_dim;
  manifest["action_dim"] = agent.action_dim;
  manifest["gamma"] = agent.cfg.gamma;
  manifest["tau"] = agent.cfg.tau;
  manifest["noise_sigma"] = agent.cfg.noise_sigma;
  manifest["action_scale"] = agent.cfg.action_scale;
  manifest["batch_size"] = agent.cfg.batch_size;
  manifest["buffer_capacity"] = agent.cfg.buffer_capacity;
  j["manifest"] = std::move(manifest);
  j["actor"] = net_to_json(agent.actor);
  j["critic"] = net_to_json(agent.critic);
  j["target_actor"] = net_to_json(agent.target_actor);
  j["target_critic"] = net_to_json(agent.target_critic);
  j["actor_opt"] = adam_to_json(agent.actor_opt);
  j["critic_opt"] = adam_to_json(agent.critic_opt);
  return j.dump(1) + "\n";
}

DdpgAgent checkpoint_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  try {
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ConfigError("checkpoint: unsupported version " + std::to_string(version));
    }
    DdpgAgent agent;
    const auto& m = j.at("manifest");
    agent.scenario_name = m.at("scenario").get<std::string>();
    agent.obs_dim = m.at("obs_dim").get<int>();
    agent.action_dim = m.at("action_dim").get<int>();
    agent.cfg.gamma = m.at("gamma").get<double>();
    agent.cfg.tau = m.at("tau").get<double>();
    agent.cfg.noise_sigma = m.at("noise_sigma").get<double>();
    agent.cfg.action_scale = m.at("action_scale").get<double>();
    agent.cfg.batch_size = m.at("batch_size").get<int>();
    agent.cfg.buffer_capacity = m.at("buffer_capacity").get<std::size_t>();
    agent.actor = net_from_json(j.at("actor"));
    agent.critic = net_from_json(j.at("critic"));
    agent.target_actor = net_from_json(j.at("target_actor"));
    agent.target_critic = net_from_json(j.at("target_critic"));
    if (agent.actor.input_size() != agent.obs_dim ||
        agent.critic.input_size() != agent.obs_dim + agent.action_dim) {
      throw ConfigError("checkpoint: net shapes disagree with manifest dims");
    }
    agent.cfg.hidden.assign(agent.actor.layer_sizes.begin() + 1,
                            agent.actor.layer_sizes.end() - 1);
    agent.cfg.actor_lr = j.at("actor_opt").at("lr").get<double>();
    agent.cfg.critic_lr = j.at("critic_opt").at("lr").get<double>();
    agent.actor_opt = adam_from_json(j.at("actor_opt"), agent.actor);
    agent.critic_opt = adam_from_json(j.at("critic_opt"), agent.critic);
    return agent;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("checkpoint: missing or malformed field: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const DdpgAgent& agent) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out << checkpoint_to_json(agent);
  if (!out) throw IoError("short write to checkpoint '" + path + "'");
}

DdpgAgent load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return checkpoint_from_json(text);
}

}  // namespace safe_manip
