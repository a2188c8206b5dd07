#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace irl {

struct EvalResult {
  std::vector<double> final_distances;
  std::vector<int> rewards;  // cumulative episode reward, 0 or 1
  std::string task;
  double likelihood = 0.0;
  int seed = 0;
  int epoch = 0;
  long long cumulative_steps = 0;
};

// Mean final distance over episodes, in units of the goal-zone radius.
double positioning_error(const EvalResult& result, double gzr);
// Percentage of episodes that never reached the goal zone.
double failure_rate(const EvalResult& result);

// Sample standard deviation over sqrt(n); throws DomainError for n < 2.
double sem(std::span<const double> sample);
double mean(std::span<const double> sample);

struct CurvePoint {
  long long cumulative_steps = 0;
  double failure_rate = 0.0;
  double positioning_error = 0.0;
};

struct LearningCurve {
  double likelihood = 0.0;
  int seed = 0;
  std::vector<CurvePoint> points;  // one per evaluation, steps increasing

  void validate() const;
};

// Least-squares slope of failure rate against cumulative steps over
// points [first, last). Throws DomainError with fewer than two points or
// no spread in cumulative steps.
double improvement_speed(const LearningCurve& curve, std::size_t first, std::size_t last);

// Two-sided Wilcoxon rank-sum (Mann-Whitney) p-value with midranks for ties.
// Exact null distribution when |a| + |b| <= kExactRankSumLimit, otherwise a
// normal approximation with tie and continuity corrections.
inline constexpr std::size_t kExactRankSumLimit = 16;
double ranksum_twosided(std::span<const double> a, std::span<const double> b);
double ranksum_exact(std::span<const double> a, std::span<const double> b);
double ranksum_normal(std::span<const double> a, std::span<const double> b);

// Holm step-down adjustment, same order as the input.
std::vector<double> holm_adjust(std::span<const double> p_values);

struct ThresholdEntry {
  double likelihood = 0.0;
  std::vector<double> best_failure_rates;  // one per seed
  double mean = 0.0;
  double sem = 0.0;
  double p_value = 1.0;
  double effect_size = 0.0;  // mean(L) - mean(baseline); negative is better
  bool significant_05 = false;
  bool significant_001 = false;
  bool detrimental = false;

  // "**" for p < 0.001, "*" for p < 0.05, "" otherwise.
  std::string mark() const;
};

struct ThresholdReport {
  double threshold = 0.0;  // percent
  long long reference_steps = 0;
  double reference_likelihood = 0.0;
  double baseline_likelihood = 0.0;
  std::vector<ThresholdEntry> entries;  // ascending L
};

struct ThresholdOptions {
  double baseline_likelihood = 0.0;
  bool holm = false;
};

// Curves are grouped by likelihood; every group's seeds must share the same
// evaluation cadence. Throws DomainError when no group reaches the threshold.
ThresholdReport threshold_report(std::span<const LearningCurve> curves, double threshold,
                                 const ThresholdOptions& options = {});

// Trapezoidal area under the seed-mean failure-rate curve over evaluation
// index (epochs), used to compare L schedules.
double failure_rate_auc(std::span<const LearningCurve> curves);

std::string render_threshold_csv(const std::string& task, std::span<const ThresholdReport> reports);

}  // namespace irl
