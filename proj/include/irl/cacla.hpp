#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "irl/environment.hpp"
#include "irl/neuralnet.hpp"
#include "irl/rng.hpp"

namespace irl {

struct Hyperparams {
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  // Std of the Gaussian exploration noise in scaled ([-1, 1]) action space.
  double exploration_rate = 0.5;
  double discount = 0.9;
  // EMA rate of the TD-error variance estimate.
  double zeta = 1e-2;
  // Initial TD-error variance.
  double initial_variance = 1.0;
  std::vector<LayerSpec> actor_hidden{{50, Activation::relu}};
  std::vector<LayerSpec> critic_hidden{{50, Activation::relu}};
  // Repeat the actor update ceil(delta / sqrt(var)) times (CACLA+Var);
  // false gives plain CACLA with a single update per positive delta.
  bool variance_scaled = true;

  // Throws ConfigError when a field is outside its search range.
  void validate() const;
  // Weaker check used when building an agent: values are usable at all.
  void check_usable() const;
  nlohmann::json to_json() const;
  static Hyperparams from_json(const nlohmann::json& doc);
  bool operator==(const Hyperparams&) const = default;
};

inline constexpr int kMaxActorRepeats = 10;

struct Transition {
  std::vector<double> state;       // raw (joints, target)
  std::vector<double> action;      // executed action, scaled space
  int reward = 0;
  std::vector<double> next_state;  // raw
  bool terminal = false;
};

class Agent {
 public:
  static Agent create(const ReachTask& task, const Hyperparams& hyper, Rng& rng);

  Network actor;
  Network critic;
  AdamState actor_adam;
  AdamState critic_adam;
  double td_variance = 1.0;
  Hyperparams hyper;
  Scaler state_scaler;
  Scaler action_scaler;
  double action_max = kDefaultActionMax;

  std::size_t dof() const { return actor.output_dim(); }
  // Raw network input for an environment state: joints followed by target.
  std::vector<double> observe(const EnvState& state) const;

  double value(std::span<const double> raw_state) const;
  // Actor output in scaled action space.
  std::vector<double> policy_scaled(std::span<const double> raw_state) const;

  nlohmann::json to_json() const;
  static Agent from_json(const nlohmann::json& doc);
  bool operator==(const Agent& other) const;

 private:
  mutable Workspace ws_;
  mutable std::vector<double> scratch_;
  std::vector<double> gradient_;
  friend struct UpdateInfo update(Agent& agent, const Transition& t);
};

struct ActionChoice {
  ActionVec exploratory;
  ActionVec greedy;
  // exploratory, scaled and clipped to [-1, 1]
  std::vector<double> exploratory_scaled;
};

ActionChoice select_action(const Agent& agent, const EnvState& state, Rng& rng);
ActionVec greedy_action(const Agent& agent, const EnvState& state);

double td_error(const Agent& agent, const Transition& t);

struct UpdateInfo {
  double delta = 0.0;
  int actor_steps = 0;
};

// One critic step toward the TD target, the variance update, and (only for
// delta > 0) the actor steps toward the executed action.
UpdateInfo update(Agent& agent, const Transition& t);

}  // namespace irl
