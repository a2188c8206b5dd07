#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

namespace irl {

// Seedable PRNG with serializable state. Independent substreams are derived
// from a master seed and a path of counters, so a run's stream does not
// depend on the order in which runs are scheduled.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  static Rng substream(std::uint64_t master, std::initializer_list<std::uint64_t> path);

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double uniform01() { return uniform(0.0, 1.0); }
  double normal() { return normal_(engine_); }
  bool bernoulli(double p) { return uniform01() < p; }
  std::uint64_t next_u64() { return engine_(); }

  std::string save_state() const;
  void restore_state(const std::string& state);

  bool operator==(const Rng& other) const {
    return engine_ == other.engine_ && normal_ == other.normal_;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace irl
