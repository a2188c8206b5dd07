#include "irl/hyperopt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "irl/errors.hpp"
#include "irl/harness.hpp"
#include "irl/text_io.hpp"

namespace irl {
namespace {

double log_uniform(const LogRange& r, Rng& rng) {
  return std::exp(rng.uniform(std::log(r.lo), std::log(r.hi)));
}

int grid_value(const WidthGrid& g, Rng& rng) {
  const int count = (g.hi - g.lo) / g.step + 1;
  const auto pick = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(count));
  return g.lo + pick * g.step;
}

std::vector<LayerSpec> sample_architecture(const SearchSpace& space, Rng& rng) {
  const int depth_count = space.max_layers - space.min_layers + 1;
  const int depth = space.min_layers + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(depth_count));
  int widths[3] = {grid_value(space.first_layer, rng), grid_value(space.deeper_layers, rng),
                   grid_value(space.deeper_layers, rng)};
  const auto act = space.activations[rng.next_u64() % space.activations.size()];
  std::vector<LayerSpec> layers;
  for (int i = 0; i < depth; ++i) layers.push_back({widths[i], act});
  return layers;
}

std::string layers_text(const std::vector<LayerSpec>& layers) {
  std::string out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(layers[i].width);
  }
  return out;
}

}  // namespace

Hyperparams sample_space(const SearchSpace& space, Rng& rng) {
  Hyperparams h;
  h.actor_lr = log_uniform(space.actor_lr, rng);
  h.critic_lr = log_uniform(space.critic_lr, rng);
  h.exploration_rate = rng.uniform(space.exploration_rate.lo, space.exploration_rate.hi);
  h.discount = rng.uniform(space.discount.lo, space.discount.hi);
  h.zeta = log_uniform(space.zeta, rng);
  h.initial_variance = rng.uniform(space.initial_variance.lo, space.initial_variance.hi);
  h.actor_hidden = sample_architecture(space, rng);
  h.critic_hidden = sample_architecture(space, rng);
  return h;
}

int select_best(const std::vector<TrialResult>& trials) {
  if (trials.empty()) throw DomainError("no trials to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < trials.size(); ++i) {
    const auto& t = trials[i];
    const auto& b = trials[best];
    if (t.validation_positioning_error < b.validation_positioning_error ||
        (t.validation_positioning_error == b.validation_positioning_error && t.index < b.index)) {
      best = i;
    }
  }
  return static_cast<int>(best);
}

TrialResult run_trial(const ReachTask& task, const DatasetSplit& data, int index, int epochs,
                      std::uint64_t seed, const SearchSpace& space) {
  TrialResult trial;
  trial.index = index;
  trial.seed = seed;
  Rng sampler = Rng::substream(seed, {0x4e11, static_cast<std::uint64_t>(index), 0});
  trial.hyper = sample_space(space, sampler);
  Rng rng = Rng::substream(seed, {0x4e11, static_cast<std::uint64_t>(index), 1});
  try {
    Agent agent = Agent::create(task, trial.hyper, rng);
    const AskLikelihood no_teacher(0.0);
    for (int e = 0; e < epochs; ++e) {
      train_epoch(task, agent, data.train, no_teacher, rng);
      ++trial.epochs_trained;
      if (!agent.actor.all_finite() || !agent.critic.all_finite()) {
        throw TrainingError("non-finite parameters");
      }
    }
    const double score = positioning_error(evaluate(task, agent, data.validation), task.gzr);
    if (!std::isfinite(score)) throw TrainingError("non-finite validation error");
    trial.validation_positioning_error = score;
  } catch (const TrainingError& e) {
    trial.validation_positioning_error = std::numeric_limits<double>::infinity();
    trial.status = std::string("diverged: ") + e.what();
  }
  return trial;
}

SearchResult search(const ReachTask& task, const DatasetSplit& data, int budget, int epochs,
                    std::uint64_t seed, const SearchSpace& space, int threads) {
  if (budget < 1) throw DomainError("search budget must be >= 1");
  if (data.train.specs.empty() || data.validation.specs.empty()) {
    throw ConfigError("hyperparameter search needs training and validation sets");
  }
  SearchResult result;
  result.trials.resize(static_cast<std::size_t>(budget));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < budget; i = next.fetch_add(1)) {
      result.trials[static_cast<std::size_t>(i)] = run_trial(task, data, i, epochs, seed, space);
    }
  };
  const int n = std::clamp(resolve_threads(threads), 1, budget);
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  result.best_index = select_best(result.trials);
  result.best = result.trials[static_cast<std::size_t>(result.best_index)].hyper;
  return result;
}

std::string render_trial_log(const std::vector<TrialResult>& trials) {
  std::ostringstream out;
  out << "trial_index,actor_lr,critic_lr,exploration_rate,discount,zeta,initial_variance,"
         "actor_layers,actor_activation,critic_layers,critic_activation,"
         "validation_positioning_error,status\n";
  for (const auto& t : trials) {
    const auto& h = t.hyper;
    out << t.index << ',' << text_io::format_double(h.actor_lr) << ','
        << text_io::format_double(h.critic_lr) << ',' << text_io::format_double(h.exploration_rate) << ','
        << text_io::format_double(h.discount) << ',' << text_io::format_double(h.zeta) << ','
        << text_io::format_double(h.initial_variance) << ',' << layers_text(h.actor_hidden) << ','
        << to_string(h.actor_hidden.front().activation) << ',' << layers_text(h.critic_hidden) << ','
        << to_string(h.critic_hidden.front().activation) << ','
        << text_io::format_double(t.validation_positioning_error) << ',' << t.status << '\n';
  }
  return out.str();
}

}  // namespace irl
