#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "irl/environment.hpp"

namespace irl {

struct EpisodeSpec {
  JointConfig start;
  CartesianPoint target;

  bool operator==(const EpisodeSpec&) const = default;
};

enum class DatasetKind { train, validation, test };

std::string to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(const std::string& text);

struct Dataset {
  DatasetKind kind = DatasetKind::train;
  std::vector<EpisodeSpec> specs;
  std::uint64_t seed = 0;
  std::string task_name;

  bool operator==(const Dataset&) const = default;
};

struct DatasetSplit {
  Dataset train;
  Dataset validation;
  Dataset test;
};

// Starts and target configurations are uniform in joint space; targets are
// stored as FK points. Pairs whose target lies inside the start's goal zone
// are redrawn. Each set uses its own PRNG substream of `seed`.
DatasetSplit generate_datasets(const ReachTask& task, std::size_t n_train, std::uint64_t seed);

// Single set with the given kind; size is n for train/test, n/5 for validation.
Dataset generate_dataset(const ReachTask& task, DatasetKind kind, std::size_t n_train,
                         std::uint64_t seed);

// Throws ConfigError when the set is empty, a start is out of limits,
// dimensions disagree with the task, or a pair violates the rejection rule.
void validate_dataset(const ReachTask& task, const Dataset& dataset);

std::string render_dataset(const Dataset& dataset, const ReachTask& task);
Dataset parse_dataset(const std::string& text, const ReachTask& task);

void save_dataset(const Dataset& dataset, const ReachTask& task, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path, const ReachTask& task);

}  // namespace irl
