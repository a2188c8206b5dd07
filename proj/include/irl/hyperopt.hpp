#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "irl/cacla.hpp"
#include "irl/datasets.hpp"

namespace irl {

struct LogRange {
  double lo;
  double hi;
};
struct LinearRange {
  double lo;
  double hi;
};
struct WidthGrid {
  int lo;
  int hi;
  int step;
};

// Hyperparameter search space. Learning rates and zeta are log-uniform,
// the remaining continuous fields uniform. Actor and critic architectures
// are drawn independently.
struct SearchSpace {
  LogRange actor_lr{1e-4, 1e-2};
  LogRange critic_lr{1e-4, 1e-2};
  LinearRange exploration_rate{0.2, 0.9};
  LinearRange discount{0.75, 1.0};
  LogRange zeta{1e-4, 0.050118723362727228};  // 10^-1.3
  LinearRange initial_variance{1.0, 3.0};
  int min_layers = 1;
  int max_layers = 3;
  WidthGrid first_layer{10, 100, 10};
  WidthGrid deeper_layers{5, 100, 5};
  std::vector<Activation> activations{Activation::relu, Activation::selu, Activation::softplus};
};

// Every trial consumes the same number of draws; layer widths beyond the
// sampled depth are drawn and discarded.
Hyperparams sample_space(const SearchSpace& space, Rng& rng);

struct TrialResult {
  int index = 0;
  Hyperparams hyper;
  double validation_positioning_error = std::numeric_limits<double>::infinity();
  int epochs_trained = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";  // "ok" or "diverged: ..."
};

struct SearchResult {
  Hyperparams best;
  int best_index = 0;
  std::vector<TrialResult> trials;
};

// argmin of validation positioning error, ties to the lowest trial index.
int select_best(const std::vector<TrialResult>& trials);

// Trains `budget` agents at L = 0 for `epochs` epochs each and scores them on
// the validation set. Trial i depends only on (seed, i).
SearchResult search(const ReachTask& task, const DatasetSplit& data, int budget, int epochs,
                    std::uint64_t seed, const SearchSpace& space = {}, int threads = 1);

TrialResult run_trial(const ReachTask& task, const DatasetSplit& data, int index, int epochs,
                      std::uint64_t seed, const SearchSpace& space);

std::string render_trial_log(const std::vector<TrialResult>& trials);

}  // namespace irl
