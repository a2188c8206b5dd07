#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <span>
#include <string>

#include "irl/kinematics.hpp"

namespace irl {

inline constexpr double kDefaultActionMax = std::numbers::pi / 10.0;

// Reaching task with sparse reward: 1 when the end effector enters the goal
// zone (distance <= gzr), 0 otherwise.
struct ReachTask {
  KinematicChain chain;
  double gzr = 0.0;
  double action_max = kDefaultActionMax;
  int steps_max = 1;
  std::string name;

  void validate() const;
};

struct EnvState {
  JointConfig joints;
  CartesianPoint target;
  // Cached FK(joints); kept in sync by make_state() and step().
  CartesianPoint effector;
  int step_count = 0;
  bool done = false;
  bool reached = false;
};

using ActionVec = std::vector<double>;

struct StepResult {
  EnvState state;
  int reward = 0;
  bool done = false;
};

EnvState make_state(const ReachTask& task, JointConfig joints, const CartesianPoint& target);

// Clips the action to +-action_max, clamps joints to their limits and
// applies the sparse reward. Throws UsageError on a finished episode.
StepResult step(const ReachTask& task, const EnvState& state, std::span<const double> action);

double distance_to_goal(const ReachTask& task, const EnvState& state);

struct EpisodeBudget {
  int steps_min = 0;
  int steps_max = 0;
  int g_min = 0;
  int n_train = 0;

  bool operator==(const EpisodeBudget&) const = default;
};

struct BudgetOverrides {
  std::optional<int> steps_min;
  std::optional<int> g_min;
};

// 3 * steps_min rounded up to the next multiple of ten.
int steps_max_from_steps_min(int steps_min);
// 10 * g_min rounded half-up to two significant digits.
int n_train_from_g_min(int g_min);
// Packing-density estimate of how many goal zones tile the workspace.
int g_min_from_volume(double workspace_volume, double gzr, int task_space_dim);

struct BudgetOptions {
  std::size_t workspace_samples = 1'000'000;
  std::uint64_t workspace_seed = 1;
};

EpisodeBudget compute_episode_budget(const KinematicChain& chain, double action_max, double gzr,
                                     const BudgetOverrides& overrides = {},
                                     const BudgetOptions& options = {});

// A task file: chain reference (relative to the task file), gzr, optional
// action_max and budget overrides.
struct TaskDefinition {
  ReachTask task;
  EpisodeBudget budget;
  BudgetOverrides overrides;
};

TaskDefinition load_task(const std::filesystem::path& path);
TaskDefinition make_task(std::string name, KinematicChain chain, double gzr,
                         const BudgetOverrides& overrides = {},
                         double action_max = kDefaultActionMax,
                         const BudgetOptions& options = {});

}  // namespace irl
