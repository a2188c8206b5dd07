#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "irl/cacla.hpp"
#include "irl/datasets.hpp"
#include "irl/interaction.hpp"

namespace irl {

struct ProbeResult {
  double mean_failure_rate = 0.0;  // percent
  double sem = 0.0;
  std::vector<double> per_agent;
};

// Failure rate of freshly initialized, non-learning agents that step through
// every training episode with the teacher active at `likelihood`.
ProbeResult probe(const ReachTask& task, const Dataset& train, const Hyperparams& hyper,
                  AskLikelihood likelihood, int n_agents, std::uint64_t seed, int threads = 1);

struct ComplexityEntry {
  double likelihood = 0.0;
  double relative_complexity = 1.0;
  double sem = 0.0;  // SEM of the probe at L, relative to the L = 0 mean
  double mean_failure_rate = 0.0;
};

struct ComplexityProfile {
  std::string task_name;
  std::vector<ComplexityEntry> entries;  // ascending L, first entry is L = 0
  int n_agents = 0;
  std::uint64_t seed = 0;
};

// Probes every L in `grid` (which must contain 0) and normalizes by L = 0.
ComplexityProfile complexity_profile(const ReachTask& task, const Dataset& train,
                                     const Hyperparams& hyper, std::span<const double> grid,
                                     int n_agents, std::uint64_t seed, int threads = 1);

struct ComplexityBand {
  double low = 0.78;
  double high = 0.95;
};

// Smallest L whose relative complexity lies in the band (inclusive); if none
// does, the L whose complexity is nearest to the band midpoint.
AskLikelihood recommend_initial_L(const ComplexityProfile& profile, const ComplexityBand& band = {});

std::string render_profile_csv(const ComplexityProfile& profile);

}  // namespace irl
