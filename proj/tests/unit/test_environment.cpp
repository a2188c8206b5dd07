#include <doctest.h>

#include <cmath>
#include <numbers>

#include "irl/environment.hpp"
#include "irl/errors.hpp"
#include "irl/rng.hpp"

using namespace irl;
using std::numbers::pi;

namespace {

ReachTask planar_task(double gzr = 0.1, int steps_max = 20) {
  const double lengths[2] = {1.0, 1.0};
  const JointRange limits[2] = {{-pi, pi}, {-pi, pi}};
  return ReachTask{planar_chain("planar2", lengths, limits), gzr, kDefaultActionMax, steps_max, "planar2"};
}

CartesianPoint point2(double x, double y) {
  CartesianPoint p;
  p.dim = 2;
  p[0] = x;
  p[1] = y;
  return p;
}

}  // namespace

TEST_CASE("reaching the goal zone yields reward 1 and ends the episode") {
  const auto task = planar_task();
  // Target is FK(0.2, 0) so one step of +0.2 on joint 0 lands on it.
  const auto target = forward_kinematics(task.chain, std::vector<double>{0.2, 0.0});
  const auto s = make_state(task, {0.0, 0.0}, target);
  const auto r = step(task, s, std::vector<double>{0.2, 0.0});
  CHECK(r.reward == 1);
  CHECK(r.done);
  CHECK(r.state.reached);
  CHECK_THROWS_AS(step(task, r.state, std::vector<double>{0.0, 0.0}), UsageError);
}

TEST_CASE("actions are clipped to the displacement bound") {
  const auto task = planar_task();
  const auto s = make_state(task, {0.0, 0.0}, point2(-2.0, 0.0));
  const auto r = step(task, s, std::vector<double>{0.5, -0.7});
  CHECK(r.state.joints[0] == doctest::Approx(pi / 10));
  CHECK(r.state.joints[1] == doctest::Approx(-pi / 10));
  CHECK(r.reward == 0);
  CHECK_FALSE(r.done);
  CHECK(r.state.step_count == 1);
}

TEST_CASE("zero action leaves the distance unchanged") {
  const auto task = planar_task();
  const auto s = make_state(task, {0.3, 0.4}, point2(-1.0, 0.5));
  const auto r = step(task, s, std::vector<double>{0.0, 0.0});
  CHECK(r.reward == 0);
  CHECK(distance_to_goal(task, r.state) == distance_to_goal(task, s));
}

TEST_CASE("episode terminates at steps_max") {
  const auto task = planar_task(0.1, 3);
  auto s = make_state(task, {0.0, 0.0}, point2(-2.0, 0.0));
  for (int i = 0; i < 3; ++i) {
    CHECK_FALSE(s.done);
    s = step(task, s, std::vector<double>{0.0, 0.0}).state;
  }
  CHECK(s.done);
  CHECK_FALSE(s.reached);
  CHECK(s.step_count == 3);
}

TEST_CASE("distance to goal") {
  const auto task = planar_task();
  const auto here = forward_kinematics(task.chain, std::vector<double>{0.7, -0.2});
  CHECK(distance_to_goal(task, make_state(task, {0.7, -0.2}, here)) == 0.0);
  CHECK(distance_to_goal(task, make_state(task, {0.0, 0.0}, point2(0.0, 2.0))) ==
        doctest::Approx(2.0 * std::sqrt(2.0)));
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> q{rng.uniform(-pi, pi), rng.uniform(-pi, pi)};
    const auto t = point2(rng.uniform(-2, 2), rng.uniform(-2, 2));
    const double x = std::cos(q[0]) + std::cos(q[0] + q[1]);
    const double y = std::sin(q[0]) + std::sin(q[0] + q[1]);
    CHECK(distance_to_goal(task, make_state(task, q, t)) ==
          doctest::Approx(std::sqrt((x - t[0]) * (x - t[0]) + (y - t[1]) * (y - t[1]))).epsilon(1e-12));
  }
}

TEST_CASE("stepping keeps joints within limits and reward binary") {
  const double lengths[2] = {1.0, 0.5};
  const JointRange limits[2] = {{-0.5, 0.5}, {0.0, 1.0}};
  ReachTask task{planar_chain("tight", lengths, limits), 0.05, kDefaultActionMax, 1000000, "tight"};
  Rng rng(17);
  auto s = make_state(task, {0.0, 0.5}, point2(-1.0, -1.0));
  for (int i = 0; i < 10'000; ++i) {
    const std::vector<double> a{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const auto r = step(task, s, a);
    CHECK((r.reward == 0 || r.reward == 1));
    REQUIRE(task.chain.within_limits(r.state.joints));
    s = r.state;
  }
}

TEST_CASE("episode budget rounding rules") {
  CHECK(steps_max_from_steps_min(6) == 20);
  CHECK(steps_max_from_steps_min(13) == 40);
  CHECK(steps_max_from_steps_min(19) == 60);
  CHECK(steps_max_from_steps_min(10) == 30);
  CHECK(n_train_from_g_min(22) == 220);
  CHECK(n_train_from_g_min(224) == 2200);
  CHECK(n_train_from_g_min(38) == 380);
  CHECK(n_train_from_g_min(261) == 2600);
  CHECK(n_train_from_g_min(5) == 50);
  CHECK(n_train_from_g_min(255) == 2600);  // half rounds up
  for (int s = 1; s < 200; ++s) {
    const int m = steps_max_from_steps_min(s);
    CHECK(m % 10 == 0);
    CHECK(m >= 3 * s);
    CHECK(m < 3 * s + 10);
  }
}

TEST_CASE("steps_min from the widest joint range") {
  // 340 degrees at pi/10 per step: 18.89 rounds to 19.
  const double lengths[2] = {1.0, 1.0};
  const double half = 170.0 * pi / 180.0;
  const JointRange limits[2] = {{-half, half}, {-1.0, 1.0}};
  const auto chain = planar_chain("wide", lengths, limits);
  const auto b = compute_episode_budget(chain, kDefaultActionMax, 0.15, {.g_min = 38});
  CHECK(b.steps_min == 19);
  CHECK(b.steps_max == 60);
  CHECK(b.n_train == 380);
}

TEST_CASE("episode budget with overrides reproduces the reference table") {
  const double lengths[2] = {1.0, 1.0};
  const JointRange limits[2] = {{-1, 1}, {-1, 1}};
  const auto chain = planar_chain("any", lengths, limits);
  struct Row {
    int steps_min, g_min, steps_max, n_train;
  };
  for (const Row r : {Row{6, 22, 20, 220}, Row{13, 224, 40, 2200}, Row{19, 38, 60, 380},
                      Row{19, 261, 60, 2600}}) {
    const auto b = compute_episode_budget(chain, kDefaultActionMax, 0.1, {r.steps_min, r.g_min});
    CHECK(b == EpisodeBudget{r.steps_min, r.steps_max, r.g_min, r.n_train});
  }
}

TEST_CASE("g_min estimate from packing density") {
  // Full disc of radius 2 packed with discs of radius 0.1.
  const double lengths[2] = {1.0, 1.0};
  const JointRange limits[2] = {{-pi, pi}, {-pi, pi}};
  const auto chain = planar_chain("disc", lengths, limits);
  const auto b = compute_episode_budget(chain, kDefaultActionMax, 0.1, {}, {200'000, 3});
  const double ideal = pi / std::sqrt(12.0) * (4.0 * pi) / (pi * 0.01);
  CHECK(std::abs(b.g_min - ideal) / ideal < 0.15);
  CHECK_THROWS_AS(compute_episode_budget(chain, 0.0, 0.1), DomainError);
}
