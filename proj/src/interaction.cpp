#include "irl/interaction.hpp"

#include <algorithm>

#include "irl/errors.hpp"

namespace irl {

AskLikelihood::AskLikelihood(double value) : value_(value) {
  if (!(value >= 0.0 && value <= kMaxAskLikelihood)) {
    throw DomainError("ask likelihood " + std::to_string(value) + " outside [0, 0.99]");
  }
}

LSchedule::LSchedule(std::vector<ScheduleSegment> segments) : segments_(std::move(segments)) {
  if (segments_.empty() || segments_.front().start_epoch != 0) {
    throw ConfigError("L schedule must start at epoch 0");
  }
  for (std::size_t i = 1; i < segments_.size(); ++i) {
    if (segments_[i].start_epoch <= segments_[i - 1].start_epoch) {
      throw ConfigError("L schedule start epochs must be strictly increasing");
    }
  }
}

LSchedule LSchedule::constant(double l) { return LSchedule({{0, AskLikelihood(l)}}); }

nlohmann::json LSchedule::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : segments_) out.push_back({s.start_epoch, s.likelihood.value()});
  return out;
}

LSchedule LSchedule::from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw ConfigError("L schedule must be a list of [epoch, L] pairs");
  std::vector<ScheduleSegment> segments;
  try {
    for (const auto& pair : doc) {
      if (!pair.is_array() || pair.size() != 2) throw ConfigError("L schedule entries are [epoch, L]");
      segments.push_back({pair[0].get<int>(), AskLikelihood(pair[1].get<double>())});
    }
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("L schedule: ") + e.what());
  }
  return LSchedule(std::move(segments));
}

AskLikelihood l_at(const LSchedule& schedule, int epoch) {
  const auto& segs = schedule.segments();
  auto it = std::upper_bound(segs.begin(), segs.end(), epoch,
                             [](int e, const ScheduleSegment& s) { return e < s.start_epoch; });
  return std::prev(it)->likelihood;
}

Judgement judge(double prev_distance, double new_distance) {
  return new_distance > prev_distance ? Judgement::mistake : Judgement::ok;
}

InteractiveStep interactive_step(const ReachTask& task, const EnvState& state, const Agent& agent,
                                 AskLikelihood likelihood, Rng& rng) {
  if (state.done) throw UsageError("interactive_step() called on a finished episode");
  const double l = likelihood.value();
  InteractiveStep out;
  auto& o = out.outcome;
  o.prev_distance = distance_to_goal(task, state);
  while (true) {
    if (o.attempts == kMaxAttemptsPerStep) {
      throw std::runtime_error("teacher rejected " + std::to_string(kMaxAttemptsPerStep) +
                               " consecutive attempts in task '" + task.name + "'");
    }
    ++o.attempts;
    auto choice = select_action(agent, state, rng);
    auto tentative = step(task, state, choice.exploratory);
    const double new_distance = distance_to_goal(task, tentative.state);
    const bool ask = l > 0.0 && rng.bernoulli(l);
    if (ask) {
      ++o.feedback_requested;
      if (judge(o.prev_distance, new_distance) == Judgement::mistake) {
        ++o.mistakes_corrected;
        continue;  // undo: the tentative state is dropped
      }
    }
    o.committed_with_feedback = ask;
    o.new_distance = new_distance;
    o.executed.state = agent.observe(state);
    o.executed.action = std::move(choice.exploratory_scaled);
    o.executed.reward = tentative.reward;
    o.executed.next_state = agent.observe(tentative.state);
    o.executed.terminal = tentative.state.reached;
    out.state = std::move(tentative.state);
    return out;
  }
}

}  // namespace irl
