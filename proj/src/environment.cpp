#include "irl/environment.hpp"

#include <algorithm>
#include <cmath>

#include "irl/errors.hpp"
#include "irl/text_io.hpp"

namespace irl {

void ReachTask::validate() const {
  if (!(gzr > 0.0) || !std::isfinite(gzr)) throw ConfigError("task '" + name + "': gzr must be > 0");
  if (!(action_max > 0.0) || !std::isfinite(action_max)) {
    throw ConfigError("task '" + name + "': action_max must be > 0");
  }
  if (steps_max < 1) throw ConfigError("task '" + name + "': steps_max must be >= 1");
}

EnvState make_state(const ReachTask& task, JointConfig joints, const CartesianPoint& target) {
  if (target.dim != task.chain.task_space_dim()) {
    throw DomainError("target dimension does not match the task space");
  }
  EnvState s;
  s.effector = forward_kinematics(task.chain, joints);
  s.joints = std::move(joints);
  s.target = target;
  return s;
}

StepResult step(const ReachTask& task, const EnvState& state, std::span<const double> action) {
  if (state.done) throw UsageError("step() called on a finished episode");
  if (action.size() != state.joints.size()) {
    throw DomainError("action has " + std::to_string(action.size()) + " entries, expected " +
                      std::to_string(state.joints.size()));
  }
  StepResult out;
  out.state.joints.resize(state.joints.size());
  for (std::size_t j = 0; j < action.size(); ++j) {
    const double delta = std::clamp(action[j], -task.action_max, task.action_max);
    const auto range = task.chain.joint_range(j);
    out.state.joints[j] = std::clamp(state.joints[j] + delta, range.min, range.max);
  }
  out.state.target = state.target;
  out.state.effector = forward_kinematics(task.chain, out.state.joints);
  out.state.step_count = state.step_count + 1;
  out.state.reached = distance(out.state.effector, out.state.target) <= task.gzr;
  out.state.done = out.state.reached || out.state.step_count >= task.steps_max;
  out.reward = out.state.reached ? 1 : 0;
  out.done = out.state.done;
  return out;
}

double distance_to_goal(const ReachTask&, const EnvState& state) {
  return distance(state.effector, state.target);
}

int steps_max_from_steps_min(int steps_min) {
  const int raw = 3 * steps_min;
  return ((raw + 9) / 10) * 10;
}

int n_train_from_g_min(int g_min) {
  long long value = 10LL * g_min;
  if (value < 100) return static_cast<int>(value);
  long long factor = 1;
  while (value / factor >= 100) factor *= 10;
  const long long rounded = ((value + factor / 2) / factor) * factor;
  return static_cast<int>(rounded);
}

int g_min_from_volume(double workspace_volume, double gzr, int task_space_dim) {
  using std::numbers::pi;
  double density = 0.0, zone = 0.0;
  if (task_space_dim == 2) {
    density = pi / std::sqrt(12.0);
    zone = pi * gzr * gzr;
  } else {
    density = pi / std::sqrt(18.0);
    zone = 4.0 / 3.0 * pi * gzr * gzr * gzr;
  }
  return std::max(1, static_cast<int>(std::lround(density * workspace_volume / zone)));
}

EpisodeBudget compute_episode_budget(const KinematicChain& chain, double action_max, double gzr,
                                     const BudgetOverrides& overrides,
                                     const BudgetOptions& options) {
  if (!(action_max > 0.0)) throw DomainError("action_max must be positive");
  if (!(gzr > 0.0)) throw DomainError("gzr must be positive");
  EpisodeBudget b;
  if (overrides.steps_min) {
    b.steps_min = *overrides.steps_min;
  } else {
    const double widest = chain.max_joint_range();
    if (!(widest > 0.0)) throw DomainError("chain '" + chain.name() + "' has zero-width joint ranges");
    b.steps_min = static_cast<int>(std::floor(widest / action_max + 0.5));
  }
  if (b.steps_min < 1) throw DomainError("steps_min must be >= 1");
  b.steps_max = steps_max_from_steps_min(b.steps_min);
  if (overrides.g_min) {
    b.g_min = *overrides.g_min;
  } else {
    const double volume = estimate_workspace_volume(chain, gzr, options.workspace_samples,
                                                    options.workspace_seed);
    b.g_min = g_min_from_volume(volume, gzr, chain.task_space_dim());
  }
  if (b.g_min < 1) throw DomainError("g_min must be >= 1");
  b.n_train = n_train_from_g_min(b.g_min);
  return b;
}

TaskDefinition make_task(std::string name, KinematicChain chain, double gzr,
                         const BudgetOverrides& overrides, double action_max,
                         const BudgetOptions& options) {
  const auto budget = compute_episode_budget(chain, action_max, gzr, overrides, options);
  TaskDefinition def{ReachTask{std::move(chain), gzr, action_max, budget.steps_max, std::move(name)},
                     budget, overrides};
  def.task.validate();
  return def;
}

TaskDefinition load_task(const std::filesystem::path& path) {
  const auto doc = text_io::read_json(path);
  try {
    const auto chain_ref = std::filesystem::path(doc.at("chain").get<std::string>());
    const auto chain_path = chain_ref.is_absolute() ? chain_ref : path.parent_path() / chain_ref;
    BudgetOverrides overrides;
    if (doc.contains("steps_min")) overrides.steps_min = doc.at("steps_min").get<int>();
    if (doc.contains("g_min")) overrides.g_min = doc.at("g_min").get<int>();
    BudgetOptions options;
    options.workspace_samples = doc.value("workspace_samples", options.workspace_samples);
    auto def = make_task(doc.at("name").get<std::string>(), KinematicChain::load(chain_path),
                         doc.at("gzr").get<double>(), overrides,
                         doc.value("action_max", kDefaultActionMax), options);
    if (doc.contains("steps_max")) {
      def.task.steps_max = doc.at("steps_max").get<int>();
      def.budget.steps_max = def.task.steps_max;
      def.task.validate();
    }
    return def;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("task file '" + path.string() + "': " + e.what());
  }
}

}  // namespace irl
