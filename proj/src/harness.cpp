#include "irl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "irl/errors.hpp"
#include "irl/text_io.hpp"

namespace irl {
namespace {

constexpr const char* kCheckpointFile = "checkpoint.json";
constexpr const char* kRecordsFile = "records.csv";
constexpr const char* kTimingFile = "timing.csv";

nlohmann::json record_to_json(const RunRecord& r) {
  return {{"task", r.task},
          {"condition", r.condition},
          {"L", r.likelihood},
          {"seed", r.seed},
          {"epoch", r.epoch},
          {"cumulative_steps", r.cumulative_steps},
          {"failure_rate", r.failure_rate},
          {"positioning_error", r.positioning_error},
          {"wall_time", r.wall_time}};
}

RunRecord record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.task = j.at("task").get<std::string>();
  r.condition = j.at("condition").get<std::string>();
  r.likelihood = j.at("L").get<double>();
  r.seed = j.at("seed").get<int>();
  r.epoch = j.at("epoch").get<int>();
  r.cumulative_steps = j.at("cumulative_steps").get<long long>();
  r.failure_rate = j.at("failure_rate").get<double>();
  r.positioning_error = j.at("positioning_error").get<double>();
  r.wall_time = j.value("wall_time", 0.0);
  return r;
}

bool record_order(const RunRecord& a, const RunRecord& b) {
  if (a.condition != b.condition) return a.condition < b.condition;
  if (a.seed != b.seed) return a.seed < b.seed;
  return a.epoch < b.epoch;
}

std::string render_timing(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << "epoch,wall_time\n";
  for (const auto& r : records) out << r.epoch << ',' << text_io::format_double(r.wall_time) << '\n';
  return out.str();
}

std::filesystem::path run_dir_for(const std::filesystem::path& output_dir, const Condition& c, int seed) {
  return output_dir / "runs" / (c.name + "_seed" + std::to_string(seed));
}

}  // namespace

EvalResult evaluate(const ReachTask& task, const Agent& agent, const Dataset& dataset) {
  if (agent.dof() != task.chain.dof() ||
      agent.state_scaler.size() != task.chain.dof() + static_cast<std::size_t>(task.chain.task_space_dim())) {
    throw DomainError("agent dimensions do not match task '" + task.name + "'");
  }
  EvalResult out;
  out.task = task.name;
  out.final_distances.reserve(dataset.specs.size());
  out.rewards.reserve(dataset.specs.size());
  for (const auto& spec : dataset.specs) {
    auto state = make_state(task, spec.start, spec.target);
    while (!state.done) state = step(task, state, greedy_action(agent, state)).state;
    out.final_distances.push_back(distance_to_goal(task, state));
    out.rewards.push_back(state.reached ? 1 : 0);
  }
  return out;
}

EpochStats train_epoch(const ReachTask& task, Agent& agent, const Dataset& train,
                       AskLikelihood likelihood, Rng& rng) {
  EpochStats stats;
  for (const auto& spec : train.specs) {
    auto state = make_state(task, spec.start, spec.target);
    while (!state.done) {
      auto is = interactive_step(task, state, agent, likelihood, rng);
      update(agent, is.outcome.executed);
      stats.attempts += is.outcome.attempts;
      stats.feedback_requested += is.outcome.feedback_requested;
      stats.mistakes_corrected += is.outcome.mistakes_corrected;
      ++stats.committed_steps;
      state = std::move(is.state);
    }
    if (state.reached) ++stats.goals_reached;
  }
  return stats;
}

std::string records_csv_header() {
  return "task,condition,L,seed,epoch,cumulative_steps,failure_rate,positioning_error";
}

std::string render_records(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << records_csv_header() << '\n';
  for (const auto& r : records) {
    out << r.task << ',' << r.condition << ',' << text_io::format_double(r.likelihood) << ',' << r.seed
        << ',' << r.epoch << ',' << r.cumulative_steps << ',' << text_io::format_double(r.failure_rate)
        << ',' << text_io::format_double(r.positioning_error) << '\n';
  }
  return out.str();
}

std::vector<RunRecord> parse_records(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind(records_csv_header(), 0) != 0) {
    throw ConfigError("records CSV: unexpected header");
  }
  std::vector<RunRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = text_io::split_csv_line(line);
    if (f.size() != 8) throw ConfigError("records CSV: row with " + std::to_string(f.size()) + " fields");
    RunRecord r;
    r.task = f[0];
    r.condition = f[1];
    r.likelihood = text_io::parse_double(f[2]);
    r.seed = static_cast<int>(text_io::parse_int(f[3]));
    r.epoch = static_cast<int>(text_io::parse_int(f[4]));
    r.cumulative_steps = text_io::parse_int(f[5]);
    r.failure_rate = text_io::parse_double(f[6]);
    r.positioning_error = text_io::parse_double(f[7]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ConditionCurves> curves_from_records(const std::vector<RunRecord>& records) {
  std::map<std::string, std::map<int, LearningCurve>> grouped;
  for (const auto& r : records) {
    auto& curve = grouped[r.condition][r.seed];
    curve.seed = r.seed;
    curve.points.push_back({r.cumulative_steps, r.failure_rate, r.positioning_error});
  }
  std::vector<ConditionCurves> out;
  for (auto& [condition, seeds] : grouped) {
    ConditionCurves cc{condition, {}};
    for (auto& [seed, curve] : seeds) {
      std::stable_sort(curve.points.begin(), curve.points.end(),
                       [](const CurvePoint& a, const CurvePoint& b) {
                         return a.cumulative_steps < b.cumulative_steps;
                       });
      cc.curves.push_back(std::move(curve));
    }
    out.push_back(std::move(cc));
  }
  // Conditions whose L never changed carry it; schedules get -1.
  for (auto& cc : out) {
    std::optional<double> l;
    bool constant = true;
    for (const auto& r : records) {
      if (r.condition != cc.condition) continue;
      if (l && *l != r.likelihood) constant = false;
      l = r.likelihood;
    }
    for (auto& c : cc.curves) c.likelihood = constant && l ? *l : -1.0;
  }
  return out;
}

std::string condition_name(double likelihood) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "L%.2f", likelihood);
  return buf;
}

void ExperimentConfig::validate() const {
  for (double l : l_grid) {
    if (!(l >= 0.0 && l <= kMaxAskLikelihood)) throw ConfigError("L grid values must lie in [0, 0.99]");
  }
  if (seeds < 1) throw ConfigError("seeds must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (l_grid.empty() && !schedule) throw ConfigError("config needs an L grid or a schedule");
  if (hyperopt_budget < 1 || hyperopt_epochs < 1) throw ConfigError("hyperopt budget/epochs must be >= 1");
  if (probe_agents < 2) throw ConfigError("probe_agents must be >= 2");
  if (!(band_low <= band_high)) throw ConfigError("complexity band must satisfy low <= high");
}

std::vector<Condition> ExperimentConfig::conditions() const {
  std::vector<Condition> out;
  for (double l : l_grid) out.push_back({condition_name(l), LSchedule::constant(l)});
  if (schedule) out.push_back({"adaptive", *schedule});
  return out;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc,
                                             const std::filesystem::path& base_dir) {
  static const std::vector<std::string> known = {
      "task",         "l_grid",          "seeds",           "epochs",       "schedule",
      "eval_every",   "output_dir",      "master_seed",     "data_seed",    "hyperparams",
      "hyperopt_budget", "hyperopt_epochs", "probe_agents", "complexity_band", "threads"};
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  try {
    for (const auto& [key, _] : doc.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
    ExperimentConfig c;
    c.task_path = resolve(doc.at("task").get<std::string>());
    if (doc.contains("l_grid")) c.l_grid = doc.at("l_grid").get<std::vector<double>>();
    c.seeds = doc.value("seeds", c.seeds);
    c.epochs = doc.value("epochs", c.epochs);
    if (doc.contains("schedule")) c.schedule = LSchedule::from_json(doc.at("schedule"));
    c.eval_every = doc.value("eval_every", c.eval_every);
    c.output_dir = resolve(doc.value("output_dir", std::string("out")));
    c.master_seed = doc.value("master_seed", c.master_seed);
    c.data_seed = doc.value("data_seed", c.master_seed);
    if (doc.contains("hyperparams")) {
      const auto& h = doc.at("hyperparams");
      if (h.is_string()) {
        c.hyperparams_path = resolve(h.get<std::string>());
      } else {
        c.hyperparams = Hyperparams::from_json(h);
      }
    }
    c.hyperopt_budget = doc.value("hyperopt_budget", c.hyperopt_budget);
    c.hyperopt_epochs = doc.value("hyperopt_epochs", c.hyperopt_epochs);
    c.probe_agents = doc.value("probe_agents", c.probe_agents);
    if (doc.contains("complexity_band")) {
      const auto band = doc.at("complexity_band").get<std::vector<double>>();
      if (band.size() != 2) throw ConfigError("complexity_band must be [low, high]");
      c.band_low = band[0];
      c.band_high = band[1];
    }
    c.threads = doc.value("threads", c.threads);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  return from_json(text_io::read_json(path), path.parent_path());
}

RunOutcome run_single(const TaskDefinition& def, const DatasetSplit& data, const Hyperparams& hyper,
                      const RunSpec& spec, const RunOptions& options) {
  const auto& task = def.task;
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  RunOutcome out;
  Rng rng = Rng::substream(options.master_seed,
                           {static_cast<std::uint64_t>(spec.condition_index),
                            static_cast<std::uint64_t>(spec.seed_index)});
  int epoch_done = 0;
  long long cumulative = 0;
  double time_offset = 0.0;
  std::optional<Agent> agent;

  const auto checkpoint_path =
      options.run_dir ? std::optional(*options.run_dir / kCheckpointFile) : std::nullopt;
  if (checkpoint_path && std::filesystem::exists(*checkpoint_path)) {
    const auto doc = text_io::read_json(*checkpoint_path);
    agent = Agent::from_json(doc.at("agent"));
    rng.restore_state(doc.at("rng").get<std::string>());
    epoch_done = doc.at("epoch").get<int>();
    cumulative = doc.at("cumulative_steps").get<long long>();
    for (const auto& r : doc.at("records")) out.records.push_back(record_from_json(r));
    if (!out.records.empty()) time_offset = out.records.back().wall_time;
  } else {
    agent = Agent::create(task, hyper, rng);
  }

  auto record = [&](int epoch, double l) {
    const auto result = evaluate(task, *agent, data.test);
    RunRecord r;
    r.task = task.name;
    r.condition = spec.condition.name;
    r.likelihood = l;
    r.seed = spec.seed_index;
    r.epoch = epoch;
    r.cumulative_steps = cumulative;
    r.failure_rate = failure_rate(result);
    r.positioning_error = positioning_error(result, task.gzr);
    r.wall_time = time_offset + elapsed();
    out.records.push_back(r);
  };
  auto save = [&](int epoch) {
    if (!options.run_dir) return;
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : out.records) records.push_back(record_to_json(r));
    text_io::write_file_atomic(*options.run_dir / kRecordsFile, render_records(out.records));
    text_io::write_file_atomic(*options.run_dir / kTimingFile, render_timing(out.records));
    text_io::write_json(*checkpoint_path, {{"epoch", epoch},
                                           {"cumulative_steps", cumulative},
                                           {"rng", rng.save_state()},
                                           {"agent", agent->to_json()},
                                           {"records", records}});
  };

  try {
    if (epoch_done == 0 && out.records.empty()) {
      record(0, l_at(spec.condition.schedule, 0).value());
      save(0);
    }
    int ran = 0;
    for (int epoch = epoch_done; epoch < options.epochs; ++epoch) {
      if (options.stop_after_epochs && ran == *options.stop_after_epochs) break;
      const auto l = l_at(spec.condition.schedule, epoch);
      const auto stats = train_epoch(task, *agent, data.train, l, rng);
      cumulative += stats.attempts;
      if (!agent->actor.all_finite() || !agent->critic.all_finite()) {
        throw TrainingError("non-finite network parameters after epoch " + std::to_string(epoch + 1));
      }
      const int finished = epoch + 1;
      if (finished % options.eval_every == 0 || finished == options.epochs) record(finished, l.value());
      save(finished);
      ++ran;
    }
  } catch (const TrainingError& e) {
    out.failed = true;
    out.error = e.what();
  }
  out.agent = std::move(agent);
  return out;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

SweepResult run_sweep(const TaskDefinition& task, const DatasetSplit& data, const Hyperparams& hyper,
                      const std::vector<Condition>& conditions, int seeds, const RunOptions& options,
                      int threads) {
  std::vector<RunSpec> specs;
  for (std::size_t c = 0; c < conditions.size(); ++c) {
    for (int s = 0; s < seeds; ++s) specs.push_back({conditions[c], c, s});
  }
  std::vector<RunOutcome> outcomes(specs.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= specs.size()) return;
      try {
        RunOptions opts = options;
        if (options.run_dir) opts.run_dir = run_dir_for(*options.run_dir, specs[i].condition, specs[i].seed_index);
        outcomes[i] = run_single(task, data, hyper, specs[i], opts);
        outcomes[i].agent.reset();
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const int n = std::min<int>(resolve_threads(threads), static_cast<int>(specs.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);
  SweepResult result;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto& o = outcomes[i];
    if (o.failed) {
      result.failed_runs.push_back(specs[i].condition.name + "_seed" + std::to_string(specs[i].seed_index) +
                                   ": " + o.error);
    }
    result.records.insert(result.records.end(), o.records.begin(), o.records.end());
  }
  std::stable_sort(result.records.begin(), result.records.end(), record_order);
  return result;
}

DatasetSplit prepare_datasets(const TaskDefinition& def, std::size_t n_train, std::uint64_t seed,
                              const std::optional<std::filesystem::path>& data_dir) {
  const auto& task = def.task;
  if (data_dir) {
    const auto train = *data_dir / "train.csv", val = *data_dir / "validation.csv",
               test = *data_dir / "test.csv";
    if (std::filesystem::exists(train) && std::filesystem::exists(val) && std::filesystem::exists(test)) {
      return {load_dataset(train, task), load_dataset(val, task), load_dataset(test, task)};
    }
  }
  auto split = generate_datasets(task, n_train, seed);
  if (data_dir) {
    save_dataset(split.train, task, *data_dir / "train.csv");
    save_dataset(split.validation, task, *data_dir / "validation.csv");
    save_dataset(split.test, task, *data_dir / "test.csv");
  }
  return split;
}

std::vector<RunRecord> merge_run_records(const std::filesystem::path& output_dir) {
  std::vector<RunRecord> all;
  const auto runs = output_dir / "runs";
  if (!std::filesystem::exists(runs)) throw ConfigError("no runs under '" + output_dir.string() + "'");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(runs)) {
    const auto f = entry.path() / kRecordsFile;
    if (std::filesystem::exists(f)) files.push_back(f);
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto records = parse_records(text_io::read_file(f));
    all.insert(all.end(), records.begin(), records.end());
  }
  std::stable_sort(all.begin(), all.end(), record_order);
  text_io::write_file_atomic(output_dir / kRecordsFile, render_records(all));
  return all;
}

SweepResult run_training(const ExperimentConfig& config, const Hyperparams& hyper) {
  const auto def = load_task(config.task_path);
  const auto data = prepare_datasets(def, static_cast<std::size_t>(def.budget.n_train), config.data_seed,
                                     config.output_dir / "data");
  RunOptions options;
  options.epochs = config.epochs;
  options.eval_every = config.eval_every;
  options.master_seed = config.master_seed;
  options.run_dir = config.output_dir;
  auto result = run_sweep(def, data, hyper, config.conditions(), config.seeds, options, config.threads);
  text_io::write_file_atomic(config.output_dir / kRecordsFile, render_records(result.records));
  return result;
}

}  // namespace irl
