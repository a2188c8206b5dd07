#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "irl/complexity.hpp"
#include "irl/errors.hpp"
#include "irl/harness.hpp"
#include "irl/hyperopt.hpp"
#include "irl/text_io.hpp"

namespace fs = std::filesystem;
using namespace irl;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "override the config master seed");
  cmd->add_option("--threads", c.threads, "worker threads (0: all cores)");
}

ExperimentConfig load_config(const Common& c) {
  auto config = ExperimentConfig::load(c.config);
  if (c.seed) config.master_seed = *c.seed;
  if (c.threads) config.threads = *c.threads;
  return config;
}

fs::path best_hyperparams_path(const ExperimentConfig& config) {
  return config.output_dir / "hyperparams.json";
}

Hyperparams resolve_hyperparams(const ExperimentConfig& config, const std::string& flag) {
  if (!flag.empty()) return Hyperparams::from_json(text_io::read_json(flag));
  if (config.hyperparams) return *config.hyperparams;
  if (!config.hyperparams_path.empty()) return Hyperparams::from_json(text_io::read_json(config.hyperparams_path));
  const auto found = best_hyperparams_path(config);
  if (fs::exists(found)) return Hyperparams::from_json(text_io::read_json(found));
  std::cerr << "irl_lab: no hyperparameters given, using defaults\n";
  return Hyperparams{};
}

DatasetSplit load_data(const ExperimentConfig& config, const TaskDefinition& def) {
  return prepare_datasets(def, static_cast<std::size_t>(def.budget.n_train), config.data_seed,
                          config.output_dir / "data");
}

int cmd_budget(const std::string& task_path) {
  const auto def = load_task(task_path);
  const auto& b = def.budget;
  std::cout << "task=" << def.task.name << '\n'
            << "steps_min=" << b.steps_min << '\n'
            << "steps_max=" << b.steps_max << '\n'
            << "g_min=" << b.g_min << '\n'
            << "n_train=" << b.n_train << '\n';
  return 0;
}

int cmd_gen_data(const Common& c) {
  const auto config = load_config(c);
  const auto def = load_task(config.task_path);
  const auto data = load_data(config, def);
  std::cout << "train=" << data.train.specs.size() << " validation=" << data.validation.specs.size()
            << " test=" << data.test.specs.size() << " -> " << (config.output_dir / "data").string() << '\n';
  return 0;
}

int cmd_hyperopt(const Common& c, std::optional<int> budget, std::optional<int> epochs) {
  const auto config = load_config(c);
  const auto def = load_task(config.task_path);
  const auto data = load_data(config, def);
  const auto result = search(def.task, data, budget.value_or(config.hyperopt_budget),
                             epochs.value_or(config.hyperopt_epochs), config.master_seed, {},
                             resolve_threads(config.threads));
  text_io::write_file_atomic(config.output_dir / "hyperopt_trials.csv", render_trial_log(result.trials));
  text_io::write_json(best_hyperparams_path(config), result.best.to_json());
  const auto& best = result.trials[static_cast<std::size_t>(result.best_index)];
  std::cout << "best trial " << best.index << " validation positioning error "
            << text_io::format_double(best.validation_positioning_error) << '\n';
  return 0;
}

int cmd_train(const Common& c, const std::string& hyper_flag) {
  const auto config = load_config(c);
  const auto hyper = resolve_hyperparams(config, hyper_flag);
  const auto result = run_training(config, hyper);
  for (const auto& f : result.failed_runs) std::cerr << "irl_lab: run failed: " << f << '\n';
  std::cout << result.records.size() << " records -> " << (config.output_dir / "records.csv").string() << '\n';
  return result.failed_runs.empty() ? 0 : 3;
}

int cmd_eval(const Common& c, const std::string& agent_path, const std::string& which) {
  const auto config = load_config(c);
  const auto def = load_task(config.task_path);
  const auto data = load_data(config, def);
  auto doc = text_io::read_json(agent_path);
  if (doc.contains("agent")) doc = doc.at("agent");
  const auto agent = Agent::from_json(doc);
  const Dataset* set = &data.test;
  if (which == "train") set = &data.train;
  else if (which == "validation") set = &data.validation;
  const auto result = evaluate(def.task, agent, *set);
  std::cout << "failure_rate=" << text_io::format_double(failure_rate(result)) << '\n'
            << "positioning_error=" << text_io::format_double(positioning_error(result, def.task.gzr)) << '\n';
  return 0;
}

int cmd_analyze(const Common& c, std::vector<double> thresholds, std::optional<double> baseline, bool holm,
                const std::string& records_flag) {
  const auto config = load_config(c);
  std::vector<RunRecord> records;
  if (!records_flag.empty()) {
    records = parse_records(text_io::read_file(records_flag));
  } else if (fs::exists(config.output_dir / "runs")) {
    records = merge_run_records(config.output_dir);
  } else {
    records = parse_records(text_io::read_file(config.output_dir / "records.csv"));
  }
  if (records.empty()) throw ConfigError("no run records to analyze");
  const std::string task = records.front().task;
  const auto grouped = curves_from_records(records);

  std::ostringstream auc;
  auc << "task,condition,auc\n";
  std::vector<LearningCurve> constant;
  for (const auto& g : grouped) {
    auc << task << ',' << g.condition << ',' << text_io::format_double(failure_rate_auc(g.curves)) << '\n';
    for (const auto& curve : g.curves) {
      if (curve.likelihood >= 0.0) constant.push_back(curve);
    }
  }
  text_io::write_file_atomic(config.output_dir / "auc.csv", auc.str());

  if (thresholds.empty()) thresholds = {20.0};
  ThresholdOptions options;
  options.baseline_likelihood = baseline.value_or(0.0);
  options.holm = holm;
  std::vector<ThresholdReport> reports;
  for (double t : thresholds) reports.push_back(threshold_report(constant, t, options));
  const auto csv = render_threshold_csv(task, reports);
  text_io::write_file_atomic(config.output_dir / "threshold_report.csv", csv);
  std::cout << csv;
  return 0;
}

int cmd_complexity(const Common& c, const std::string& hyper_flag) {
  const auto config = load_config(c);
  const auto def = load_task(config.task_path);
  const auto data = load_data(config, def);
  const auto hyper = resolve_hyperparams(config, hyper_flag);
  auto grid = config.l_grid;
  if (std::find(grid.begin(), grid.end(), 0.0) == grid.end()) grid.insert(grid.begin(), 0.0);
  const auto profile = complexity_profile(def.task, data.train, hyper, grid, config.probe_agents,
                                          config.master_seed, resolve_threads(config.threads));
  text_io::write_file_atomic(config.output_dir / "complexity.csv", render_profile_csv(profile));
  const auto l = recommend_initial_L(profile, {config.band_low, config.band_high});
  std::cout << render_profile_csv(profile) << "recommended_L=" << text_io::format_double(l.value()) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactive reinforcement learning experiments for simulated robot arms"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "irl_lab 1.0");

  Common common;
  std::string task_path, hyper_flag, agent_path, which = "test", records_flag;
  std::optional<int> budget, epochs;
  std::vector<double> thresholds;
  std::optional<double> baseline;
  bool holm = false;

  auto* budget_cmd = app.add_subcommand("budget", "episode budget of a task file");
  budget_cmd->add_option("-t,--task", task_path, "task definition (JSON)")->required()->check(CLI::ExistingFile);

  auto* gen = app.add_subcommand("gen-data", "generate train/validation/test sets");
  add_common(gen, common);

  auto* hopt = app.add_subcommand("hyperopt", "random search over hyperparameters at L = 0");
  add_common(hopt, common);
  hopt->add_option("--budget", budget, "number of trials");
  hopt->add_option("--epochs", epochs, "epochs per trial");

  auto* train = app.add_subcommand("train", "train every (condition, seed) run; resumes from checkpoints");
  add_common(train, common);
  train->add_option("--hyperparams", hyper_flag, "hyperparameter file")->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("eval", "evaluate an agent checkpoint without feedback");
  add_common(eval, common);
  eval->add_option("-a,--agent", agent_path, "agent or run checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--set", which, "dataset to evaluate on")->check(CLI::IsMember({"train", "validation", "test"}));

  auto* analyze = app.add_subcommand("analyze", "threshold report and failure-rate AUC per condition");
  add_common(analyze, common);
  analyze->add_option("--threshold", thresholds, "failure-rate thresholds in percent");
  analyze->add_option("--baseline", baseline, "baseline L for the rank-sum tests");
  analyze->add_flag("--holm", holm, "Holm-adjust the p-values");
  analyze->add_option("--records", records_flag, "records CSV instead of the output directory")
      ->check(CLI::ExistingFile);

  auto* complexity = app.add_subcommand("complexity", "relative task complexity probe over the L grid");
  add_common(complexity, common);
  complexity->add_option("--hyperparams", hyper_flag, "hyperparameter file")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*budget_cmd) return cmd_budget(task_path);
    if (*gen) return cmd_gen_data(common);
    if (*hopt) return cmd_hyperopt(common, budget, epochs);
    if (*train) return cmd_train(common, hyper_flag);
    if (*eval) return cmd_eval(common, agent_path, which);
    if (*analyze) return cmd_analyze(common, thresholds, baseline, holm, records_flag);
    if (*complexity) return cmd_complexity(common, hyper_flag);
  } catch (const std::exception& e) {
    std::cerr << "irl_lab: error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
