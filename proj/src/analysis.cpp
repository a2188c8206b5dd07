#include "irl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "irl/errors.hpp"
#include "irl/text_io.hpp"

namespace irl {
namespace {

struct Ranking {
  std::vector<double> midranks;  // pooled order: a first, then b
  std::vector<std::size_t> tie_sizes;
};

Ranking midranks(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size() + b.size();
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });
  Ranking r;
  r.midranks.assign(n, 0.0);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r.midranks[order[k]] = rank;
    r.tie_sizes.push_back(j - i + 1);
    i = j + 1;
  }
  return r;
}

void require_samples(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("rank-sum test needs non-empty samples");
}

}  // namespace

double positioning_error(const EvalResult& result, double gzr) {
  if (!(gzr > 0.0)) throw DomainError("gzr must be positive");
  if (result.final_distances.empty()) throw DomainError("no episodes in evaluation result");
  double total = 0.0;
  for (double d : result.final_distances) total += d / gzr;
  return total / static_cast<double>(result.final_distances.size());
}

double failure_rate(const EvalResult& result) {
  if (result.rewards.empty()) throw DomainError("no episodes in evaluation result");
  long long hits = 0;
  for (int r : result.rewards) hits += r;
  return 100.0 * (1.0 - static_cast<double>(hits) / static_cast<double>(result.rewards.size()));
}

double mean(std::span<const double> sample) {
  if (sample.empty()) throw DomainError("mean of an empty sample");
  return std::accumulate(sample.begin(), sample.end(), 0.0) / static_cast<double>(sample.size());
}

double sem(std::span<const double> sample) {
  if (sample.size() < 2) throw DomainError("SEM needs at least two observations");
  const double m = mean(sample);
  double ss = 0.0;
  for (double x : sample) ss += (x - m) * (x - m);
  const double n = static_cast<double>(sample.size());
  return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

void LearningCurve::validate() const {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].cumulative_steps <= points[i - 1].cumulative_steps) {
      throw DomainError("learning curve cumulative steps must be strictly increasing");
    }
  }
}

double improvement_speed(const LearningCurve& curve, std::size_t first, std::size_t last) {
  last = std::min(last, curve.points.size());
  if (first >= last || last - first < 2) throw DomainError("improvement speed needs >= 2 points");
  const double n = static_cast<double>(last - first);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    mx += static_cast<double>(curve.points[i].cumulative_steps);
    my += curve.points[i].failure_rate;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    const double dx = static_cast<double>(curve.points[i].cumulative_steps) - mx;
    sxx += dx * dx;
    sxy += dx * (curve.points[i].failure_rate - my);
  }
  if (sxx == 0.0) throw DomainError("improvement speed window has no spread in steps");
  return sxy / sxx;
}

double ranksum_exact(std::span<const double> a, std::span<const double> b) {
  require_samples(a, b);
  const auto ranking = midranks(a, b);
  const std::size_t n = a.size(), total = ranking.midranks.size();
  // Midranks are multiples of 1/2; count subsets by doubled rank sum.
  std::vector<int> doubled(total);
  for (std::size_t i = 0; i < total; ++i) doubled[i] = static_cast<int>(std::lround(2.0 * ranking.midranks[i]));
  int observed = 0;
  for (std::size_t i = 0; i < n; ++i) observed += doubled[i];
  const int max_sum = std::accumulate(doubled.begin(), doubled.end(), 0);
  // ways[k][s]: number of k-subsets of the items seen so far with sum s.
  std::vector<std::vector<double>> ways(n + 1, std::vector<double>(max_sum + 1, 0.0));
  ways[0][0] = 1.0;
  for (std::size_t i = 0; i < total; ++i) {
    const int r = doubled[i];
    for (std::size_t k = std::min(n, i + 1); k >= 1; --k) {
      auto& dst = ways[k];
      const auto& src = ways[k - 1];
      for (int s = max_sum; s >= r; --s) dst[s] += src[s - r];
    }
  }
  double below = 0.0, above = 0.0, all = 0.0;
  for (int s = 0; s <= max_sum; ++s) {
    const double w = ways[n][s];
    all += w;
    if (s <= observed) below += w;
    if (s >= observed) above += w;
  }
  return std::min(1.0, 2.0 * std::min(below, above) / all);
}

double ranksum_normal(std::span<const double> a, std::span<const double> b) {
  require_samples(a, b);
  const auto ranking = midranks(a, b);
  const double n = static_cast<double>(a.size()), m = static_cast<double>(b.size());
  const double total = n + m;
  double w = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) w += ranking.midranks[i];
  const double u = w - n * (n + 1.0) / 2.0;
  double tie_term = 0.0;
  for (auto t : ranking.tie_sizes) {
    const double td = static_cast<double>(t);
    tie_term += td * td * td - td;
  }
  const double variance = n * m / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
  if (!(variance > 0.0)) return 1.0;
  const double z = std::max(0.0, std::abs(u - n * m / 2.0) - 0.5) / std::sqrt(variance);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

double ranksum_twosided(std::span<const double> a, std::span<const double> b) {
  require_samples(a, b);
  if (a.size() + b.size() <= kExactRankSumLimit) return ranksum_exact(a, b);
  return ranksum_normal(a, b);
}

std::vector<double> holm_adjust(std::span<const double> p_values) {
  const std::size_t k = p_values.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return p_values[i] < p_values[j]; });
  std::vector<double> out(k);
  double running = 0.0;
  for (std::size_t rank = 0; rank < k; ++rank) {
    const double adjusted = std::min(1.0, static_cast<double>(k - rank) * p_values[order[rank]]);
    running = std::max(running, adjusted);
    out[order[rank]] = running;
  }
  return out;
}

std::string ThresholdEntry::mark() const {
  if (significant_001) return "**";
  if (significant_05) return "*";
  return "";
}

namespace {

std::map<double, std::vector<const LearningCurve*>> group_by_likelihood(
    std::span<const LearningCurve> curves) {
  std::map<double, std::vector<const LearningCurve*>> groups;
  for (const auto& c : curves) {
    if (c.points.empty()) throw DomainError("empty learning curve");
    c.validate();
    groups[c.likelihood].push_back(&c);
  }
  return groups;
}

std::size_t common_length(const std::vector<const LearningCurve*>& group) {
  std::size_t len = group.front()->points.size();
  for (const auto* c : group) len = std::min(len, c->points.size());
  return len;
}

}  // namespace

ThresholdReport threshold_report(std::span<const LearningCurve> curves, double threshold,
                                 const ThresholdOptions& options) {
  const auto groups = group_by_likelihood(curves);
  if (!groups.contains(options.baseline_likelihood)) {
    throw DomainError("no curves for the baseline likelihood");
  }
  ThresholdReport report;
  report.threshold = threshold;
  report.baseline_likelihood = options.baseline_likelihood;
  bool found = false;
  for (const auto& [l, group] : groups) {
    const std::size_t len = common_length(group);
    for (std::size_t i = 0; i < len; ++i) {
      double fr = 0.0, steps = 0.0;
      for (const auto* c : group) {
        fr += c->points[i].failure_rate;
        steps += static_cast<double>(c->points[i].cumulative_steps);
      }
      fr /= static_cast<double>(group.size());
      steps /= static_cast<double>(group.size());
      if (fr <= threshold) {
        const auto s = static_cast<long long>(std::llround(steps));
        if (!found || s < report.reference_steps) {
          report.reference_steps = s;
          report.reference_likelihood = l;
        }
        found = true;
        break;
      }
    }
  }
  if (!found) {
    throw DomainError("no L value reaches the " + text_io::format_double(threshold) +
                      "% failure-rate threshold");
  }
  for (const auto& [l, group] : groups) {
    ThresholdEntry e;
    e.likelihood = l;
    for (const auto* c : group) {
      double best = c->points.front().failure_rate;
      for (const auto& p : c->points) {
        if (p.cumulative_steps > report.reference_steps) break;
        best = std::min(best, p.failure_rate);
      }
      e.best_failure_rates.push_back(best);
    }
    e.mean = mean(e.best_failure_rates);
    e.sem = e.best_failure_rates.size() >= 2 ? sem(e.best_failure_rates) : 0.0;
    report.entries.push_back(std::move(e));
  }
  const auto& baseline =
      *std::find_if(report.entries.begin(), report.entries.end(),
                    [&](const ThresholdEntry& e) { return e.likelihood == options.baseline_likelihood; });
  const auto baseline_sample = baseline.best_failure_rates;
  const double baseline_mean = baseline.mean;
  std::vector<double> raw_p;
  for (auto& e : report.entries) {
    e.effect_size = e.mean - baseline_mean;
    e.p_value = ranksum_twosided(e.best_failure_rates, baseline_sample);
    raw_p.push_back(e.p_value);
  }
  if (options.holm) {
    std::vector<double> others;
    for (const auto& e : report.entries) {
      if (e.likelihood != options.baseline_likelihood) others.push_back(e.p_value);
    }
    const auto adjusted = holm_adjust(others);
    std::size_t k = 0;
    for (auto& e : report.entries) {
      if (e.likelihood != options.baseline_likelihood) e.p_value = adjusted[k++];
    }
  }
  for (auto& e : report.entries) {
    e.significant_05 = e.p_value < 0.05;
    e.significant_001 = e.p_value < 0.001;
    e.detrimental = e.effect_size > 0.0 && e.significant_05;
  }
  return report;
}

double failure_rate_auc(std::span<const LearningCurve> curves) {
  if (curves.empty()) throw DomainError("no curves");
  std::size_t len = curves.front().points.size();
  for (const auto& c : curves) len = std::min(len, c.points.size());
  if (len < 2) throw DomainError("AUC needs at least two evaluation points");
  std::vector<double> m(len, 0.0);
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < len; ++i) m[i] += c.points[i].failure_rate;
  }
  for (double& x : m) x /= static_cast<double>(curves.size());
  double area = 0.0;
  for (std::size_t i = 1; i < len; ++i) area += 0.5 * (m[i - 1] + m[i]);
  return area;
}

std::string render_threshold_csv(const std::string& task, std::span<const ThresholdReport> reports) {
  std::ostringstream out;
  if (reports.empty()) return "";
  out << "task,threshold,reference_steps,reference_L";
  for (const auto& e : reports.front().entries) {
    const auto l = text_io::format_double(e.likelihood);
    out << ",L" << l << "_mean,L" << l << "_sem,L" << l << "_effect,L" << l << "_p,L" << l
        << "_mark,L" << l << "_detrimental";
  }
  out << '\n';
  for (const auto& r : reports) {
    out << task << ',' << text_io::format_double(r.threshold) << ',' << r.reference_steps << ','
        << text_io::format_double(r.reference_likelihood);
    for (const auto& e : r.entries) {
      out << ',' << text_io::format_double(e.mean) << ',' << text_io::format_double(e.sem) << ','
          << text_io::format_double(e.effect_size) << ',' << text_io::format_double(e.p_value)
          << ',' << e.mark() << ',' << (e.detrimental ? 1 : 0);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace irl
