#include "irl/complexity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "irl/analysis.hpp"
#include "irl/errors.hpp"
#include "irl/text_io.hpp"

namespace irl {
namespace {

double probe_agent(const ReachTask& task, const Dataset& train, const Hyperparams& hyper,
                   AskLikelihood likelihood, std::uint64_t seed, int index) {
  Rng rng = Rng::substream(seed, {0xc0de, static_cast<std::uint64_t>(index)});
  const Agent agent = Agent::create(task, hyper, rng);
  long long misses = 0;
  for (const auto& spec : train.specs) {
    auto state = make_state(task, spec.start, spec.target);
    while (!state.done) state = interactive_step(task, state, agent, likelihood, rng).state;
    if (!state.reached) ++misses;
  }
  return 100.0 * static_cast<double>(misses) / static_cast<double>(train.specs.size());
}

}  // namespace

ProbeResult probe(const ReachTask& task, const Dataset& train, const Hyperparams& hyper,
                  AskLikelihood likelihood, int n_agents, std::uint64_t seed, int threads) {
  if (train.specs.empty()) throw ConfigError("complexity probe needs a training set");
  if (n_agents < 2) throw DomainError("complexity probe needs at least two agents");
  ProbeResult out;
  out.per_agent.assign(static_cast<std::size_t>(n_agents), 0.0);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n_agents; i = next.fetch_add(1)) {
      out.per_agent[static_cast<std::size_t>(i)] = probe_agent(task, train, hyper, likelihood, seed, i);
    }
  };
  const int n = std::clamp(threads, 1, n_agents);
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  out.mean_failure_rate = mean(out.per_agent);
  out.sem = sem(out.per_agent);
  return out;
}

ComplexityProfile complexity_profile(const ReachTask& task, const Dataset& train,
                                     const Hyperparams& hyper, std::span<const double> grid,
                                     int n_agents, std::uint64_t seed, int threads) {
  std::vector<double> ls(grid.begin(), grid.end());
  std::sort(ls.begin(), ls.end());
  ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
  if (ls.empty() || ls.front() != 0.0) throw DomainError("complexity grid must include L = 0");
  ComplexityProfile profile{task.name, {}, n_agents, seed};
  double baseline = 0.0;
  for (double l : ls) {
    const auto r = probe(task, train, hyper, AskLikelihood(l), n_agents, seed, threads);
    if (l == 0.0) {
      if (!(r.mean_failure_rate > 0.0)) {
        throw DomainError("untrained agents never fail at L = 0; relative complexity is undefined");
      }
      baseline = r.mean_failure_rate;
      profile.entries.push_back({0.0, 1.0, r.sem / baseline, r.mean_failure_rate});
      continue;
    }
    profile.entries.push_back({l, r.mean_failure_rate / baseline, r.sem / baseline, r.mean_failure_rate});
  }
  return profile;
}

AskLikelihood recommend_initial_L(const ComplexityProfile& profile, const ComplexityBand& band) {
  if (profile.entries.empty()) throw DomainError("empty complexity profile");
  auto entries = profile.entries;
  std::sort(entries.begin(), entries.end(),
            [](const ComplexityEntry& a, const ComplexityEntry& b) { return a.likelihood < b.likelihood; });
  for (const auto& e : entries) {
    if (e.relative_complexity >= band.low && e.relative_complexity <= band.high) {
      return AskLikelihood(e.likelihood);
    }
  }
  const double mid = 0.5 * (band.low + band.high);
  const auto best = std::min_element(entries.begin(), entries.end(), [&](const auto& a, const auto& b) {
    return std::abs(a.relative_complexity - mid) < std::abs(b.relative_complexity - mid);
  });
  return AskLikelihood(best->likelihood);
}

std::string render_profile_csv(const ComplexityProfile& profile) {
  std::ostringstream out;
  out << "task,L,relative_complexity,sem,n_agents,seed\n";
  for (const auto& e : profile.entries) {
    out << profile.task_name << ',' << text_io::format_double(e.likelihood) << ','
        << text_io::format_double(e.relative_complexity) << ',' << text_io::format_double(e.sem) << ','
        << profile.n_agents << ',' << profile.seed << '\n';
  }
  return out.str();
}

}  // namespace irl
