#include "irl/datasets.hpp"

#include <sstream>

#include "irl/errors.hpp"
#include "irl/rng.hpp"
#include "irl/text_io.hpp"

namespace irl {
namespace {

constexpr std::size_t kRejectionWindow = 100'000;
// More than 99.9% rejections within one window.
constexpr std::size_t kMinAcceptedPerWindow = 100;

JointConfig uniform_joints(const KinematicChain& chain, Rng& rng) {
  JointConfig q(chain.dof());
  for (std::size_t j = 0; j < q.size(); ++j) {
    const auto r = chain.joint_range(j);
    q[j] = rng.uniform(r.min, r.max);
  }
  return q;
}

std::uint64_t kind_index(DatasetKind kind) { return static_cast<std::uint64_t>(kind); }

}  // namespace

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::train:
      return "train";
    case DatasetKind::validation:
      return "validation";
    case DatasetKind::test:
      return "test";
  }
  return "?";
}

DatasetKind dataset_kind_from_string(const std::string& text) {
  if (text == "train") return DatasetKind::train;
  if (text == "validation") return DatasetKind::validation;
  if (text == "test") return DatasetKind::test;
  throw ConfigError("unknown dataset kind '" + text + "'");
}

Dataset generate_dataset(const ReachTask& task, DatasetKind kind, std::size_t n_train,
                         std::uint64_t seed) {
  if (n_train < 5) throw ConfigError("n_train must be >= 5");
  const std::size_t count = kind == DatasetKind::validation ? n_train / 5 : n_train;
  Rng rng = Rng::substream(seed, {0xda7a, kind_index(kind)});
  Dataset out{kind, {}, seed, task.name};
  out.specs.reserve(count);
  std::size_t window_draws = 0, window_accepted = 0;
  while (out.specs.size() < count) {
    auto start = uniform_joints(task.chain, rng);
    const auto target = forward_kinematics(task.chain, uniform_joints(task.chain, rng));
    const auto origin = forward_kinematics(task.chain, start);
    ++window_draws;
    if (distance(origin, target) > task.gzr) {
      out.specs.push_back({std::move(start), target});
      ++window_accepted;
    }
    if (window_draws == kRejectionWindow) {
      if (window_accepted < kMinAcceptedPerWindow) {
        throw ConfigError("task '" + task.name +
                          "': over 99.9% of dataset draws rejected; gzr too large for the "
                          "workspace");
      }
      window_draws = window_accepted = 0;
    }
  }
  return out;
}

DatasetSplit generate_datasets(const ReachTask& task, std::size_t n_train, std::uint64_t seed) {
  return {generate_dataset(task, DatasetKind::train, n_train, seed),
          generate_dataset(task, DatasetKind::validation, n_train, seed),
          generate_dataset(task, DatasetKind::test, n_train, seed)};
}

void validate_dataset(const ReachTask& task, const Dataset& dataset) {
  if (dataset.specs.empty()) throw ConfigError("dataset is empty");
  for (std::size_t i = 0; i < dataset.specs.size(); ++i) {
    const auto& spec = dataset.specs[i];
    const std::string where = "dataset row " + std::to_string(i);
    if (spec.start.size() != task.chain.dof()) throw ConfigError(where + ": wrong number of joints");
    if (spec.target.dim != task.chain.task_space_dim()) {
      throw ConfigError(where + ": wrong target dimension");
    }
    if (!task.chain.within_limits(spec.start)) throw ConfigError(where + ": start outside joint limits");
    if (!(distance(forward_kinematics(task.chain, spec.start), spec.target) > task.gzr)) {
      throw ConfigError(where + ": target lies inside the start's goal zone");
    }
  }
}

std::string render_dataset(const Dataset& dataset, const ReachTask& task) {
  std::ostringstream out;
  out << "task=" << dataset.task_name << ",seed=" << dataset.seed
      << ",kind=" << to_string(dataset.kind) << '\n';
  for (std::size_t j = 0; j < task.chain.dof(); ++j) out << 'j' << (j + 1) << ',';
  out << (task.chain.task_space_dim() == 2 ? "x,y" : "x,y,z") << '\n';
  for (const auto& spec : dataset.specs) {
    for (double q : spec.start) out << text_io::format_double17(q) << ',';
    for (int k = 0; k < spec.target.dim; ++k) {
      out << text_io::format_double17(spec.target[k]) << (k + 1 < spec.target.dim ? ',' : '\n');
    }
  }
  return out.str();
}

Dataset parse_dataset(const std::string& text, const ReachTask& task) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("dataset: missing header");
  Dataset out;
  for (const auto& field : text_io::split_csv_line(line)) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw ConfigError("dataset: malformed header field '" + field + "'");
    const auto key = field.substr(0, eq), value = field.substr(eq + 1);
    if (key == "task") {
      out.task_name = value;
    } else if (key == "seed") {
      out.seed = static_cast<std::uint64_t>(text_io::parse_int(value));
    } else if (key == "kind") {
      out.kind = dataset_kind_from_string(value);
    } else {
      throw ConfigError("dataset: unknown header key '" + key + "'");
    }
  }
  if (out.task_name != task.name) {
    throw ConfigError("dataset belongs to task '" + out.task_name + "', expected '" + task.name + "'");
  }
  if (!std::getline(in, line)) throw ConfigError("dataset: missing column header");
  const std::size_t dof = task.chain.dof();
  const int dim = task.chain.task_space_dim();
  if (text_io::split_csv_line(line).size() != dof + static_cast<std::size_t>(dim)) {
    throw ConfigError("dataset: column count does not match the task");
  }
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = text_io::split_csv_line(line);
    if (fields.size() != dof + static_cast<std::size_t>(dim)) {
      throw ConfigError("dataset: row with " + std::to_string(fields.size()) + " fields");
    }
    EpisodeSpec spec;
    for (std::size_t j = 0; j < dof; ++j) spec.start.push_back(text_io::parse_double(fields[j]));
    spec.target.dim = dim;
    for (int k = 0; k < dim; ++k) spec.target[k] = text_io::parse_double(fields[dof + k]);
    out.specs.push_back(std::move(spec));
  }
  validate_dataset(task, out);
  return out;
}

void save_dataset(const Dataset& dataset, const ReachTask& task, const std::filesystem::path& path) {
  text_io::write_file_atomic(path, render_dataset(dataset, task));
}

Dataset load_dataset(const std::filesystem::path& path, const ReachTask& task) {
  try {
    return parse_dataset(text_io::read_file(path), task);
  } catch (const ConfigError& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
}

}  // namespace irl
