#pragma once

#include <vector>

#include <json.hpp>

#include "irl/cacla.hpp"
#include "irl/environment.hpp"
#include "irl/rng.hpp"

namespace irl {

inline constexpr double kMaxAskLikelihood = 0.99;
inline constexpr int kMaxAttemptsPerStep = 10'000;

// Probability of asking the teacher about an attempted action.
class AskLikelihood {
 public:
  AskLikelihood() = default;
  // Throws DomainError outside [0, 0.99].
  explicit AskLikelihood(double value);
  double value() const { return value_; }
  bool operator==(const AskLikelihood&) const = default;

 private:
  double value_ = 0.0;
};

struct ScheduleSegment {
  int start_epoch = 0;
  AskLikelihood likelihood;
  bool operator==(const ScheduleSegment&) const = default;
};

// Piecewise-constant L over epochs; a segment applies from its start epoch
// (inclusive) until the next segment's start.
class LSchedule {
 public:
  explicit LSchedule(std::vector<ScheduleSegment> segments);
  static LSchedule constant(double l);

  const std::vector<ScheduleSegment>& segments() const { return segments_; }
  bool is_constant() const { return segments_.size() == 1; }

  nlohmann::json to_json() const;
  // Accepts [[epoch, L], ...].
  static LSchedule from_json(const nlohmann::json& doc);
  bool operator==(const LSchedule&) const = default;

 private:
  std::vector<ScheduleSegment> segments_;
};

AskLikelihood l_at(const LSchedule& schedule, int epoch);

enum class Judgement { ok, mistake };

// An action is a mistake iff it strictly increases the distance to the goal.
Judgement judge(double prev_distance, double new_distance);

struct StepOutcome {
  Transition executed;
  int attempts = 0;
  int feedback_requested = 0;
  int mistakes_corrected = 0;
  // Whether the teacher was asked about the attempt that was committed.
  bool committed_with_feedback = false;
  double prev_distance = 0.0;
  double new_distance = 0.0;
};

struct InteractiveStep {
  EnvState state;
  StepOutcome outcome;
};

// Sample an exploratory action and apply it tentatively; with probability L
// ask the teacher, and if it reports a mistake discard the attempt and
// sample again. Only the committed attempt advances the episode. With L = 0
// no teacher randomness is drawn, so the stream matches plain CACLA stepping.
InteractiveStep interactive_step(const ReachTask& task, const EnvState& state, const Agent& agent,
                                 AskLikelihood likelihood, Rng& rng);

}  // namespace irl
