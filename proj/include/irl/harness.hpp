#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "irl/analysis.hpp"
#include "irl/cacla.hpp"
#include "irl/datasets.hpp"
#include "irl/interaction.hpp"

namespace irl {

// Greedy rollouts of every episode in the set: no exploration noise, no
// teacher, no updates.
EvalResult evaluate(const ReachTask& task, const Agent& agent, const Dataset& dataset);

struct EpochStats {
  long long attempts = 0;  // every attempted action, including undone ones
  long long committed_steps = 0;
  long long feedback_requested = 0;
  long long mistakes_corrected = 0;
  long long goals_reached = 0;
};

// One pass over the training set with interactive stepping at `likelihood`
// and a CACLA update on every committed transition.
EpochStats train_epoch(const ReachTask& task, Agent& agent, const Dataset& train,
                       AskLikelihood likelihood, Rng& rng);

struct RunRecord {
  std::string task;
  std::string condition;  // "L0.5", "adaptive", ...
  double likelihood = 0.0;  // L in force during the epoch that ended here
  int seed = 0;
  int epoch = 0;
  long long cumulative_steps = 0;
  double failure_rate = 0.0;
  double positioning_error = 0.0;
  double wall_time = 0.0;  // seconds since run start; kept out of records.csv

  bool operator==(const RunRecord& o) const {
    return task == o.task && condition == o.condition && likelihood == o.likelihood &&
           seed == o.seed && epoch == o.epoch && cumulative_steps == o.cumulative_steps &&
           failure_rate == o.failure_rate && positioning_error == o.positioning_error;
  }
};

std::string records_csv_header();
std::string render_records(const std::vector<RunRecord>& records);
std::vector<RunRecord> parse_records(const std::string& text);

// Groups records into per-(condition, seed) learning curves.
struct ConditionCurves {
  std::string condition;
  std::vector<LearningCurve> curves;
};
std::vector<ConditionCurves> curves_from_records(const std::vector<RunRecord>& records);

struct Condition {
  std::string name;
  LSchedule schedule;
};

std::string condition_name(double likelihood);

struct ExperimentConfig {
  std::filesystem::path task_path;
  std::vector<double> l_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99};
  int seeds = 20;
  int epochs = 10;
  std::optional<LSchedule> schedule;
  int eval_every = 1;
  std::filesystem::path output_dir = "out";
  std::uint64_t master_seed = 1;
  std::uint64_t data_seed = 1;
  std::optional<Hyperparams> hyperparams;
  std::filesystem::path hyperparams_path;
  // hyperopt settings
  int hyperopt_budget = 100;
  int hyperopt_epochs = 10;
  // complexity probe settings
  int probe_agents = 20;
  double band_low = 0.78;
  double band_high = 0.95;
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
  std::vector<Condition> conditions() const;
  static ExperimentConfig load(const std::filesystem::path& path);
  static ExperimentConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
};

struct RunSpec {
  Condition condition;
  std::size_t condition_index = 0;
  int seed_index = 0;
};

struct RunOutcome {
  std::vector<RunRecord> records;
  std::optional<Agent> agent;
  bool failed = false;
  std::string error;
};

struct RunOptions {
  int epochs = 10;
  int eval_every = 1;
  std::uint64_t master_seed = 1;
  // When set, the run checkpoints there after every epoch and resumes from
  // an existing checkpoint.
  std::optional<std::filesystem::path> run_dir;
  // Stop after this many epochs in this invocation (simulates an interrupt).
  std::optional<int> stop_after_epochs;
};

// Deterministic given (master_seed, condition_index, seed_index).
RunOutcome run_single(const TaskDefinition& task, const DatasetSplit& data, const Hyperparams& hyper,
                      const RunSpec& spec, const RunOptions& options);

struct SweepResult {
  std::vector<RunRecord> records;  // sorted by condition order, seed, epoch
  std::vector<std::string> failed_runs;
};

// Runs every (condition, seed) pair, `threads` at a time.
SweepResult run_sweep(const TaskDefinition& task, const DatasetSplit& data, const Hyperparams& hyper,
                      const std::vector<Condition>& conditions, int seeds, const RunOptions& options,
                      int threads);

// run_training over a config: loads/generates data, runs the sweep with
// per-run checkpoint directories under output_dir/runs, and writes the
// merged output_dir/records.csv.
SweepResult run_training(const ExperimentConfig& config, const Hyperparams& hyper);

// Loads output_dir/data/*.csv when present, otherwise generates and saves.
DatasetSplit prepare_datasets(const TaskDefinition& task, std::size_t n_train, std::uint64_t seed,
                              const std::optional<std::filesystem::path>& data_dir);

// Merges per-run records under output_dir/runs into output_dir/records.csv.
std::vector<RunRecord> merge_run_records(const std::filesystem::path& output_dir);

int resolve_threads(int requested);

}  // namespace irl
