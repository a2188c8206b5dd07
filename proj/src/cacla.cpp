#include "irl/cacla.hpp"

#include <algorithm>
#include <cmath>

#include "irl/errors.hpp"

namespace irl {
namespace {

constexpr int kBoundsProbeSamples = 20'000;
constexpr double kBoundsPadding = 0.05;

void require_range(const char* name, double value, double lo, double hi) {
  if (!(value >= lo && value <= hi)) {
    throw ConfigError(std::string("hyperparameter ") + name + " = " + std::to_string(value) +
                      " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

nlohmann::json layers_to_json(const std::vector<LayerSpec>& layers) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& l : layers) out.push_back({{"width", l.width}, {"activation", to_string(l.activation)}});
  return out;
}

std::vector<LayerSpec> layers_from_json(const nlohmann::json& doc) {
  std::vector<LayerSpec> out;
  for (const auto& l : doc) {
    out.push_back({l.at("width").get<int>(), activation_from_string(l.at("activation").get<std::string>())});
  }
  return out;
}

// Bounding box of the reachable targets, padded; fixed seed so that agents
// built for the same task share the same input scaling.
Scaler state_scaler_for(const ReachTask& task) {
  const auto& chain = task.chain;
  const int dim = chain.task_space_dim();
  std::vector<double> lo, hi;
  for (std::size_t j = 0; j < chain.dof(); ++j) {
    const auto r = chain.joint_range(j);
    lo.push_back(r.min);
    hi.push_back(r.max);
  }
  std::vector<double> tlo(dim, HUGE_VAL), thi(dim, -HUGE_VAL);
  Rng rng(0xb0b0);
  JointConfig q(chain.dof());
  for (int s = 0; s < kBoundsProbeSamples; ++s) {
    for (std::size_t j = 0; j < q.size(); ++j) q[j] = rng.uniform(lo[j], hi[j]);
    const auto p = forward_kinematics(chain, q);
    for (int k = 0; k < dim; ++k) {
      tlo[k] = std::min(tlo[k], p[k]);
      thi[k] = std::max(thi[k], p[k]);
    }
  }
  const double reach = std::max(chain.reach(), 1e-6);
  for (int k = 0; k < dim; ++k) {
    const double pad = std::max(kBoundsPadding * (thi[k] - tlo[k]), 1e-3 * reach);
    lo.push_back(tlo[k] - pad);
    hi.push_back(thi[k] + pad);
  }
  return Scaler(std::move(lo), std::move(hi));
}

}  // namespace

void Hyperparams::check_usable() const {
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw ConfigError("learning rates must be > 0");
  if (!(exploration_rate >= 0.0)) throw ConfigError("exploration_rate must be >= 0");
  if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigError("discount must lie in [0, 1]");
  if (!(zeta > 0.0 && zeta < 1.0)) throw ConfigError("zeta must lie in (0, 1)");
  if (!(initial_variance > 0.0) || !std::isfinite(initial_variance)) {
    throw ConfigError("initial_variance must be > 0");
  }
}

void Hyperparams::validate() const {
  check_usable();
  require_range("actor_lr", actor_lr, 1e-4, 1e-2);
  require_range("critic_lr", critic_lr, 1e-4, 1e-2);
  require_range("exploration_rate", exploration_rate, 0.2, 0.9);
  require_range("discount", discount, 0.75, 1.0);
  require_range("zeta", zeta, 1e-4, std::pow(10.0, -1.3));
  require_range("initial_variance", initial_variance, 1.0, 3.0);
  for (const auto* layers : {&actor_hidden, &critic_hidden}) {
    if (layers->empty() || layers->size() > 3) throw ConfigError("1 to 3 hidden layers required");
    for (std::size_t i = 0; i < layers->size(); ++i) {
      const int w = (*layers)[i].width;
      const int step = i == 0 ? 10 : 5;
      if (w < step || w > 100 || w % step != 0) {
        throw ConfigError("hidden layer " + std::to_string(i + 1) + " width " + std::to_string(w) +
                          " is off the search grid");
      }
      if ((*layers)[i].activation == Activation::linear) throw ConfigError("linear hidden layer");
    }
  }
}

nlohmann::json Hyperparams::to_json() const {
  return {{"actor_lr", actor_lr},
          {"critic_lr", critic_lr},
          {"exploration_rate", exploration_rate},
          {"discount", discount},
          {"zeta", zeta},
          {"initial_variance", initial_variance},
          {"actor_hidden", layers_to_json(actor_hidden)},
          {"critic_hidden", layers_to_json(critic_hidden)},
          {"variance_scaled", variance_scaled}};
}

Hyperparams Hyperparams::from_json(const nlohmann::json& doc) {
  // Missing fields keep their defaults so configs can list only what differs.
  static const std::vector<std::string> known = {"actor_lr",         "critic_lr",    "exploration_rate",
                                                 "discount",         "zeta",         "initial_variance",
                                                 "actor_hidden",     "critic_hidden", "variance_scaled"};
  try {
    for (const auto& [key, _] : doc.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw ConfigError("unknown hyperparameter '" + key + "'");
      }
    }
    Hyperparams h;
    h.actor_lr = doc.value("actor_lr", h.actor_lr);
    h.critic_lr = doc.value("critic_lr", h.critic_lr);
    h.exploration_rate = doc.value("exploration_rate", h.exploration_rate);
    h.discount = doc.value("discount", h.discount);
    h.zeta = doc.value("zeta", h.zeta);
    h.initial_variance = doc.value("initial_variance", h.initial_variance);
    if (doc.contains("actor_hidden")) h.actor_hidden = layers_from_json(doc.at("actor_hidden"));
    if (doc.contains("critic_hidden")) h.critic_hidden = layers_from_json(doc.at("critic_hidden"));
    h.variance_scaled = doc.value("variance_scaled", h.variance_scaled);
    h.check_usable();
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("hyperparameters: ") + e.what());
  }
}

Agent Agent::create(const ReachTask& task, const Hyperparams& hyper, Rng& rng) {
  hyper.check_usable();
  const int dof = static_cast<int>(task.chain.dof());
  const int input = dof + task.chain.task_space_dim();
  Agent a;
  a.hyper = hyper;
  a.actor = Network::initialized(NetConfig{input, hyper.actor_hidden, dof}, rng);
  a.critic = Network::initialized(NetConfig{input, hyper.critic_hidden, 1}, rng);
  a.actor_adam = AdamState::for_network(a.actor, hyper.actor_lr);
  a.critic_adam = AdamState::for_network(a.critic, hyper.critic_lr);
  a.td_variance = hyper.initial_variance;
  a.state_scaler = state_scaler_for(task);
  a.action_max = task.action_max;
  a.action_scaler = Scaler(std::vector<double>(dof, -task.action_max),
                           std::vector<double>(dof, task.action_max));
  return a;
}

std::vector<double> Agent::observe(const EnvState& state) const {
  std::vector<double> out(state.joints.begin(), state.joints.end());
  const auto t = state.target.view();
  out.insert(out.end(), t.begin(), t.end());
  return out;
}

double Agent::value(std::span<const double> raw_state) const {
  scratch_.resize(raw_state.size());
  state_scaler.scale(raw_state, scratch_);
  return forward(critic, scratch_, ws_)[0];
}

std::vector<double> Agent::policy_scaled(std::span<const double> raw_state) const {
  scratch_.resize(raw_state.size());
  state_scaler.scale(raw_state, scratch_);
  const auto y = forward(actor, scratch_, ws_);
  return {y.begin(), y.end()};
}

nlohmann::json Agent::to_json() const {
  return {{"actor", actor.to_json()},
          {"critic", critic.to_json()},
          {"actor_adam", actor_adam.to_json()},
          {"critic_adam", critic_adam.to_json()},
          {"td_variance", td_variance},
          {"hyperparams", hyper.to_json()},
          {"state_scaler", state_scaler.to_json()},
          {"action_scaler", action_scaler.to_json()},
          {"action_max", action_max}};
}

Agent Agent::from_json(const nlohmann::json& doc) {
  try {
    Agent a;
    a.actor = Network::from_json(doc.at("actor"));
    a.critic = Network::from_json(doc.at("critic"));
    a.actor_adam = AdamState::from_json(doc.at("actor_adam"));
    a.critic_adam = AdamState::from_json(doc.at("critic_adam"));
    a.td_variance = doc.at("td_variance").get<double>();
    a.hyper = Hyperparams::from_json(doc.at("hyperparams"));
    a.state_scaler = Scaler::from_json(doc.at("state_scaler"));
    a.action_scaler = Scaler::from_json(doc.at("action_scaler"));
    a.action_max = doc.at("action_max").get<double>();
    if (a.critic.output_dim() != 1 || a.actor.output_dim() != a.action_scaler.size() ||
        a.actor.input_dim() != a.state_scaler.size() || a.critic.input_dim() != a.state_scaler.size()) {
      throw ConfigError("agent checkpoint: inconsistent network shapes");
    }
    if (a.actor_adam.first_moment.size() != a.actor.parameter_count() ||
        a.critic_adam.first_moment.size() != a.critic.parameter_count()) {
      throw ConfigError("agent checkpoint: optimizer state does not match the networks");
    }
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("agent checkpoint: ") + e.what());
  }
}

bool Agent::operator==(const Agent& o) const {
  return actor == o.actor && critic == o.critic && actor_adam == o.actor_adam &&
         critic_adam == o.critic_adam && td_variance == o.td_variance && hyper == o.hyper &&
         state_scaler == o.state_scaler && action_scaler == o.action_scaler &&
         action_max == o.action_max;
}

ActionChoice select_action(const Agent& agent, const EnvState& state, Rng& rng) {
  const auto raw = agent.observe(state);
  const auto mean = agent.policy_scaled(raw);
  const std::size_t n = mean.size();
  ActionChoice out;
  out.greedy = agent.action_scaler.unscale(mean);
  out.exploratory_scaled.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.greedy[i] = std::clamp(out.greedy[i], -agent.action_max, agent.action_max);
    out.exploratory_scaled[i] = mean[i] + agent.hyper.exploration_rate * rng.normal();
  }
  out.exploratory = agent.action_scaler.unscale(out.exploratory_scaled);
  for (std::size_t i = 0; i < n; ++i) {
    out.exploratory[i] = std::clamp(out.exploratory[i], -agent.action_max, agent.action_max);
  }
  agent.action_scaler.scale(out.exploratory, out.exploratory_scaled);
  return out;
}

ActionVec greedy_action(const Agent& agent, const EnvState& state) {
  auto a = agent.action_scaler.unscale(agent.policy_scaled(agent.observe(state)));
  for (double& x : a) x = std::clamp(x, -agent.action_max, agent.action_max);
  return a;
}

double td_error(const Agent& agent, const Transition& t) {
  const double v = agent.value(t.state);
  const double v_next = t.terminal ? 0.0 : agent.value(t.next_state);
  const double delta = static_cast<double>(t.reward) + agent.hyper.discount * v_next - v;
  if (!std::isfinite(delta)) throw TrainingError("non-finite TD error (critic diverged)");
  return delta;
}

UpdateInfo update(Agent& agent, const Transition& t) {
  UpdateInfo info;
  info.delta = td_error(agent, t);

  // Critic: one step on 0.5 * (V(s) - target)^2, whose output gradient is -delta.
  agent.scratch_.resize(t.state.size());
  agent.state_scaler.scale(t.state, agent.scratch_);
  forward(agent.critic, agent.scratch_, agent.ws_);
  agent.gradient_.resize(agent.critic.parameter_count());
  const double upstream_v = -info.delta;
  backward(agent.critic, agent.ws_, std::span<const double>(&upstream_v, 1), agent.gradient_);
  adam_step(agent.critic, agent.critic_adam, agent.gradient_);

  const double zeta = agent.hyper.zeta;
  agent.td_variance = (1.0 - zeta) * agent.td_variance + zeta * info.delta * info.delta;

  if (info.delta <= 0.0) return info;

  int repeats = 1;
  if (agent.hyper.variance_scaled) {
    repeats = static_cast<int>(std::ceil(info.delta / std::sqrt(agent.td_variance)));
    repeats = std::clamp(repeats, 1, kMaxActorRepeats);
  }
  agent.gradient_.resize(agent.actor.parameter_count());
  std::vector<double> upstream(agent.actor.output_dim());
  for (int r = 0; r < repeats; ++r) {
    const auto y = forward(agent.actor, agent.scratch_, agent.ws_);
    for (std::size_t i = 0; i < upstream.size(); ++i) upstream[i] = y[i] - t.action[i];
    backward(agent.actor, agent.ws_, upstream, agent.gradient_);
    adam_step(agent.actor, agent.actor_adam, agent.gradient_);
  }
  info.actor_steps = repeats;
  return info;
}

}  // namespace irl
