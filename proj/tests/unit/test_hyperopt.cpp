#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "irl/hyperopt.hpp"

using namespace irl;
using std::numbers::pi;

TEST_CASE("samples respect the search space") {
  const SearchSpace space;
  Rng rng(1);
  std::vector<double> lrs;
  for (int i = 0; i < 10'000; ++i) {
    const auto h = sample_space(space, rng);
    CHECK_NOTHROW(h.validate());
    for (const auto* layers : {&h.actor_hidden, &h.critic_hidden}) {
      REQUIRE(layers->size() >= 1);
      REQUIRE(layers->size() <= 3);
      const int w0 = layers->front().width;
      CHECK(w0 % 10 == 0);
      CHECK(w0 >= 10);
      CHECK(w0 <= 100);
      for (std::size_t l = 1; l < layers->size(); ++l) {
        CHECK((*layers)[l].width % 5 == 0);
        CHECK((*layers)[l].width >= 5);
        CHECK((*layers)[l].width <= 100);
        CHECK((*layers)[l].activation == layers->front().activation);
      }
    }
    CHECK(h.zeta <= 0.050118723362727228);
    lrs.push_back(h.actor_lr);
  }
  std::nth_element(lrs.begin(), lrs.begin() + 5000, lrs.end());
  CHECK(lrs[5000] >= 8e-4);
  CHECK(lrs[5000] <= 1.25e-3);
}

TEST_CASE("fixed draw count per sample") {
  // The stream position after a sample does not depend on the sampled depth.
  const SearchSpace space;
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) sample_space(space, a);
  SearchSpace shallow = space;
  shallow.max_layers = 1;
  for (int i = 0; i < 100; ++i) sample_space(shallow, b);
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("best selection") {
  std::vector<TrialResult> trials(4);
  for (int i = 0; i < 4; ++i) trials[static_cast<std::size_t>(i)].index = i;
  trials[0].validation_positioning_error = 3.0;
  trials[1].validation_positioning_error = 1.5;
  trials[2].validation_positioning_error = 1.5;
  trials[3].validation_positioning_error = std::numeric_limits<double>::infinity();
  CHECK(select_best(trials) == 1);
  CHECK(select_best({trials[3]}) == 0);
}

TEST_CASE("search on a one-link task") {
  const double lengths[1] = {1.0};
  const JointRange limits[1] = {{-pi / 2, pi / 2}};
  const ReachTask task{planar_chain("link1", lengths, limits), 0.05 * pi, kDefaultActionMax, 10, "link1"};
  const auto data = generate_datasets(task, 60, 9);
  const auto result = search(task, data, 20, 3, 77, {}, 2);
  REQUIRE(result.trials.size() == 20);
  std::vector<double> scores;
  for (const auto& t : result.trials) {
    CHECK(t.epochs_trained == 3);
    CHECK(t.validation_positioning_error >= 0.0);
    scores.push_back(t.validation_positioning_error);
    CHECK(result.trials[static_cast<std::size_t>(result.best_index)].validation_positioning_error <=
          t.validation_positioning_error);
  }
  std::sort(scores.begin(), scores.end());
  CHECK(result.trials[static_cast<std::size_t>(result.best_index)].validation_positioning_error <= scores[10]);
  CHECK(result.best == result.trials[static_cast<std::size_t>(result.best_index)].hyper);

  const auto again = search(task, data, 20, 3, 77, {}, 1);
  CHECK(render_trial_log(again.trials) == render_trial_log(result.trials));
  const auto single = search(task, data, 1, 1, 77, {}, 1);
  CHECK(single.best_index == 0);
  CHECK(single.best == result.trials[0].hyper);
  const auto log = render_trial_log(result.trials);
  CHECK(log.rfind("trial_index,", 0) == 0);
}
