#include <doctest.h>

#include <cmath>
#include <numbers>

#include "irl/cacla.hpp"
#include "irl/datasets.hpp"
#include "irl/errors.hpp"
#include "irl/harness.hpp"

using namespace irl;
using std::numbers::pi;

namespace {

ReachTask planar_task() {
  const double lengths[2] = {1.0, 1.0};
  const JointRange limits[2] = {{-pi, pi}, {-pi, pi}};
  return ReachTask{planar_chain("planar2", lengths, limits), 0.1, kDefaultActionMax, 20, "planar2"};
}

Hyperparams small_hyper() {
  Hyperparams h;
  h.actor_hidden = {{10, Activation::relu}};
  h.critic_hidden = {{10, Activation::relu}};
  return h;
}

void zero(Network& net) {
  for (auto& p : net.parameters()) p = 0.0;
}

Transition transition(const Agent& agent, const ReachTask& task, std::vector<double> q, std::vector<double> q_next,
                      int reward, bool terminal) {
  CartesianPoint target;
  target.dim = 2;
  target[0] = -1.0;
  target[1] = 0.5;
  const auto s = make_state(task, q, target);
  const auto s2 = make_state(task, q_next, target);
  return Transition{agent.observe(s), {0.3, -0.4}, reward, agent.observe(s2), terminal};
}

}  // namespace

TEST_CASE("td error cases") {
  const auto task = planar_task();
  Rng rng(1);
  auto agent = Agent::create(task, small_hyper(), rng);
  zero(agent.critic);
  CHECK(td_error(agent, transition(agent, task, {0, 0}, {0.1, 0}, 1, true)) == 1.0);
  CHECK(td_error(agent, transition(agent, task, {0, 0}, {0.1, 0}, 0, false)) == 0.0);

  // V(s) = k * relu(scaled joint 0) + 0.2: zero at joint 0 = mid-range.
  const auto& layer = agent.critic.layers()[0];
  agent.critic.weights(0)[0] = 1.0;  // hidden unit 0 reads scaled joint 0
  agent.critic.biases(1)[0] = 0.2;
  const auto t = transition(agent, task, {0.0, 0.0}, {1.0, 0.0}, 0, false);
  const double u = agent.state_scaler.scale(t.next_state)[0];
  REQUIRE(u > 0);
  agent.critic.weights(1)[0] = 0.3 / u;
  (void)layer;
  CHECK(agent.value(t.state) == doctest::Approx(0.2));
  CHECK(agent.value(t.next_state) == doctest::Approx(0.5));
  agent.hyper.discount = 0.9;
  CHECK(td_error(agent, t) == doctest::Approx(0.25));

  agent.critic.biases(1)[0] = std::nan("");
  CHECK_THROWS_AS(td_error(agent, t), TrainingError);
}

TEST_CASE("actor untouched when delta is not positive") {
  const auto task = planar_task();
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    auto agent = Agent::create(task, small_hyper(), rng);
    // Constant positive critic with zero reward and no bootstrap: delta < 0.
    agent.critic.biases(1)[0] += 2.0;
    const Network actor = agent.actor;
    const AdamState actor_adam = agent.actor_adam;
    const auto info = update(agent, transition(agent, task, {0.06 * trial, 0}, {0.2, 0}, 0, true));
    CHECK(info.delta <= 0.0);
    CHECK(info.actor_steps == 0);
    CHECK(agent.actor == actor);
    CHECK(agent.actor_adam == actor_adam);
  }
}

TEST_CASE("variance update arithmetic") {
  const auto task = planar_task();
  Rng rng(3);
  auto h = small_hyper();
  h.zeta = 0.1;
  auto agent = Agent::create(task, h, rng);
  zero(agent.critic);
  agent.critic.biases(1)[0] = -1.0;  // V = -1 everywhere; terminal, r = 1: delta = 2
  agent.td_variance = 1.0;
  const auto info = update(agent, transition(agent, task, {0, 0}, {0.1, 0}, 1, true));
  CHECK(info.delta == 2.0);
  CHECK(agent.td_variance == doctest::Approx(1.3));
  // ceil(2 / sqrt(1.3)) = 2 actor steps
  CHECK(info.actor_steps == 2);
}

TEST_CASE("actor repeat count is capped") {
  const auto task = planar_task();
  Rng rng(4);
  auto h = small_hyper();
  h.zeta = 1e-4;
  auto agent = Agent::create(task, h, rng);
  zero(agent.critic);
  agent.critic.biases(1)[0] = -100.0;
  agent.td_variance = 1.0;
  CHECK(update(agent, transition(agent, task, {0, 0}, {0.1, 0}, 1, true)).actor_steps == kMaxActorRepeats);

  auto plain = small_hyper();
  plain.variance_scaled = false;
  auto agent2 = Agent::create(task, plain, rng);
  zero(agent2.critic);
  agent2.critic.biases(1)[0] = -100.0;
  CHECK(update(agent2, transition(agent2, task, {0, 0}, {0.1, 0}, 1, true)).actor_steps == 1);
}

TEST_CASE("positive delta moves the actor toward the executed action") {
  const auto task = planar_task();
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto agent = Agent::create(task, small_hyper(), rng);
    zero(agent.critic);
    const auto t = transition(agent, task, {0.3, -0.2}, {0.4, 0}, 1, true);
    auto dist = [&] {
      const auto y = agent.policy_scaled(t.state);
      return std::hypot(y[0] - t.action[0], y[1] - t.action[1]);
    };
    const double before = dist();
    const auto info = update(agent, t);
    CHECK(info.delta > 0);
    CHECK(info.actor_steps >= 1);
    CHECK(dist() < before);
  }
}

TEST_CASE("variance stays positive") {
  const auto task = planar_task();
  Rng rng(6);
  auto h = small_hyper();
  h.zeta = 0.5;
  auto agent = Agent::create(task, h, rng);
  for (int i = 0; i < 500; ++i) {
    const int r = i % 3 == 0;
    update(agent, transition(agent, task, {rng.uniform(-3, 3), rng.uniform(-3, 3)},
                             {rng.uniform(-3, 3), 0}, r, r == 1));
    REQUIRE(agent.td_variance > 0.0);
    REQUIRE(std::isfinite(agent.td_variance));
  }
}

TEST_CASE("exploration noise and clipping") {
  const auto task = planar_task();
  Rng rng(7);
  auto h = small_hyper();
  h.exploration_rate = 0.2;
  auto agent = Agent::create(task, h, rng);
  zero(agent.actor);
  CartesianPoint target;
  target.dim = 2;
  target[0] = 1.0;
  const auto s = make_state(task, {0, 0}, target);
  double sum = 0, sq = 0;
  const int n = 100'000;
  for (int i = 0; i < n; ++i) {
    const auto c = select_action(agent, s, rng);
    CHECK(c.greedy[0] == 0.0);
    const double e = c.exploratory_scaled[0];
    sum += e;
    sq += e * e;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(sd - 0.2) / 0.2 < 0.02);

  agent.hyper.exploration_rate = 0.9;
  int clipped = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto c = select_action(agent, s, rng);
    for (double a : c.exploratory) {
      CHECK(std::abs(a) <= pi / 10);
      clipped += std::abs(a) == pi / 10;
    }
  }
  CHECK(clipped > 0);

  agent.hyper.exploration_rate = 0.0;
  const auto c = select_action(agent, s, rng);
  CHECK(c.exploratory == c.greedy);
}

TEST_CASE("agent JSON round trip") {
  const auto task = planar_task();
  Rng rng(8);
  auto agent = Agent::create(task, small_hyper(), rng);
  update(agent, transition(agent, task, {0, 0}, {0.1, 0}, 1, true));
  const auto back = Agent::from_json(nlohmann::json::parse(agent.to_json().dump()));
  CHECK(back == agent);
  CHECK(Hyperparams::from_json(agent.hyper.to_json()) == agent.hyper);
}

TEST_CASE("hyperparameter ranges") {
  Hyperparams h;
  CHECK_NOTHROW(h.validate());
  h.exploration_rate = 0.1;
  CHECK_THROWS_AS(h.validate(), ConfigError);
  h = Hyperparams{};
  h.zeta = 0.1;
  CHECK_THROWS_AS(h.validate(), ConfigError);
  CHECK_NOTHROW(h.check_usable());
  h.discount = 1.5;
  CHECK_THROWS_AS(h.check_usable(), ConfigError);
}

TEST_CASE("single link reaching task is learned") {
  const double lengths[1] = {1.0};
  const JointRange limits[1] = {{-pi / 2, pi / 2}};
  // zone diameter is 10% of the reachable arc
  const ReachTask task{planar_chain("link1", lengths, limits), 0.05 * pi, kDefaultActionMax, 10, "link1"};
  const auto data = generate_datasets(task, 200, 42);
  const Hyperparams h;
  int good = 0;
  for (int seed = 0; seed < 5; ++seed) {
    Rng rng(100 + static_cast<std::uint64_t>(seed));
    auto agent = Agent::create(task, h, rng);
    double fr = 100.0;
    for (int epoch = 0; epoch < 50 && fr >= 20.0; ++epoch) {
      train_epoch(task, agent, data.train, AskLikelihood(0.0), rng);
      fr = failure_rate(evaluate(task, agent, data.test));
    }
    good += fr < 20.0;
  }
  CHECK(good >= 4);
}
