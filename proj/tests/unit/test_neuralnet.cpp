#include <doctest.h>

#include <cmath>
#include <numeric>

#include "irl/errors.hpp"
#include "irl/neuralnet.hpp"
#include "irl/rng.hpp"

using namespace irl;

namespace {

NetConfig config(int in, std::vector<LayerSpec> hidden, int out) {
  NetConfig c;
  c.input_dim = in;
  c.hidden = std::move(hidden);
  c.output_dim = out;
  return c;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

bool close_rel(double a, double b, double rel, double abs_floor) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

}  // namespace

TEST_CASE("zero network outputs zeros") {
  const Network net(config(3, {{8, Activation::selu}, {4, Activation::softplus}}, 2));
  const std::vector<double> x{0.3, -1.0, 2.0};
  // softplus(0) is nonzero but the zero output layer discards it
  CHECK(forward(net, x) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("identity linear layer") {
  Network net(config(3, {}, 3));
  auto w = net.weights(0);
  for (int i = 0; i < 3; ++i) w[static_cast<std::size_t>(i * 3 + i)] = 1.0;
  const std::vector<double> x{0.5, -2.0, 7.25};
  CHECK(forward(net, x) == x);
}

TEST_CASE("two layer relu net by hand") {
  Network net(config(2, {{3, Activation::relu}}, 1));
  const double w1[] = {1, 1, 2, 0.5, -1, 0};
  const double b1[] = {0.5, 0, -0.5};
  const double w2[] = {3, -2, 1};
  std::copy(std::begin(w1), std::end(w1), net.weights(0).begin());
  std::copy(std::begin(b1), std::end(b1), net.biases(0).begin());
  std::copy(std::begin(w2), std::end(w2), net.weights(1).begin());
  net.biases(1)[0] = 0.25;
  // pre = (-0.5, 1, -1.5), relu = (0, 1, 0), out = -2 + 0.25
  CHECK(forward(net, std::vector<double>{1.0, -2.0})[0] == -1.75);
  CHECK_THROWS(forward(net, std::vector<double>{1.0}));
}

TEST_CASE("backprop matches central finite differences") {
  Rng rng(7);
  const Activation acts[] = {Activation::relu, Activation::selu, Activation::softplus};
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int depth = 1 + trial % 3;
    std::vector<LayerSpec> hidden;
    for (int l = 0; l < depth; ++l) hidden.push_back({2 + static_cast<int>(rng.uniform(0, 6)), acts[(trial / 3) % 3]});
    const int in = 1 + static_cast<int>(rng.uniform(0, 4));
    const int out = 1 + static_cast<int>(rng.uniform(0, 3));
    Network net = Network::initialized(config(in, hidden, out), rng);
    for (auto& p : net.parameters()) p += rng.uniform(-0.1, 0.1);  // nonzero biases
    std::vector<double> x(static_cast<std::size_t>(in)), up(static_cast<std::size_t>(out));
    for (auto& v : x) v = rng.uniform(-1, 1);
    for (auto& v : up) v = rng.uniform(-1, 1);

    const auto grad = backward(net, x, up);
    REQUIRE(grad.size() == net.parameter_count());
    const double h = 1e-6;
    for (std::size_t i = 0; i < net.parameter_count(); ++i) {
      const double saved = net.parameters()[i];
      net.parameters()[i] = saved + h;
      const double fp = dot(forward(net, x), up);
      net.parameters()[i] = saved - h;
      const double fm = dot(forward(net, x), up);
      net.parameters()[i] = saved;
      const double fd = (fp - fm) / (2 * h);
      CHECK_MESSAGE(close_rel(grad[i], fd, 1e-5, 1e-8), "trial " << trial << " param " << i);
      ++checked;
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("zero upstream gives zero gradient") {
  Rng rng(1);
  const Network net = Network::initialized(config(3, {{10, Activation::selu}, {5, Activation::relu}}, 2), rng);
  const auto g = backward(net, std::vector<double>{0.1, 0.2, 0.3}, std::vector<double>{0.0, 0.0});
  for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("softplus gradient asymptotics") {
  // single softplus unit feeding an identity output: d out / d bias = sigmoid(pre)
  Network net(config(1, {{1, Activation::softplus}}, 1));
  net.weights(1)[0] = 1.0;
  const auto& layer = net.layers()[0];
  for (double pre : {-50.0, 50.0}) {
    net.biases(0)[0] = pre;
    const auto g = backward(net, std::vector<double>{0.0}, std::vector<double>{2.0});
    const double db = g[layer.bias_offset];
    if (pre < 0) CHECK(std::abs(db) < 1e-12);
    else CHECK(db == doctest::Approx(2.0));
  }
  net.biases(0)[0] = 800.0;  // overflow-safe
  CHECK(forward(net, std::vector<double>{0.0})[0] == doctest::Approx(800.0));
}

TEST_CASE("first Adam step moves each parameter by lr") {
  Rng rng(3);
  Network net = Network::initialized(config(2, {{5, Activation::relu}}, 1), rng);
  const auto before = std::vector<double>(net.parameters().begin(), net.parameters().end());
  auto adam = AdamState::for_network(net, 0.001);
  const std::vector<double> g(net.parameter_count(), 1.0);
  adam_step(net, adam, g);
  CHECK(adam.step == 1);
  for (std::size_t i = 0; i < before.size(); ++i)
    CHECK(net.parameters()[i] == doctest::Approx(before[i] - 0.001).epsilon(1e-6));
}

TEST_CASE("Adam with zero gradient and determinism") {
  Rng rng(4);
  Network net = Network::initialized(config(2, {{5, Activation::selu}}, 2), rng);
  const Network start = net;
  auto adam = AdamState::for_network(net, 0.01);
  adam_step(net, adam, std::vector<double>(net.parameter_count(), 0.0));
  CHECK(net == start);
  CHECK(adam.step == 1);

  Network a = start, b = start;
  auto sa = AdamState::for_network(a, 0.01), sb = sa;
  std::vector<double> g(a.parameter_count());
  for (auto& v : g) v = rng.normal();
  adam_step(a, sa, g);
  adam_step(b, sb, g);
  CHECK(a == b);
  CHECK(sa == sb);

  g[0] = std::nan("");
  CHECK_THROWS_AS(adam_step(a, sa, g), TrainingError);
}

TEST_CASE("linear regression with Adam converges") {
  Rng rng(11);
  Network net = Network::initialized(config(1, {}, 1), rng);
  auto adam = AdamState::for_network(net, 0.01);
  std::vector<double> xs(100);
  for (auto& x : xs) x = rng.uniform(-1, 1);
  auto mse = [&] {
    double s = 0;
    for (double x : xs) {
      const double e = forward(net, std::vector<double>{x})[0] - (2 * x + 1);
      s += e * e;
    }
    return s / static_cast<double>(xs.size());
  };
  Workspace ws;
  std::vector<double> grad(net.parameter_count());
  int steps = 0;
  for (; steps < 5000 && mse() >= 1e-3; ++steps) {
    const double x = xs[static_cast<std::size_t>(steps) % xs.size()];
    const std::vector<double> in{x};
    const double y = forward(net, in, ws)[0];
    const std::vector<double> up{y - (2 * x + 1)};
    backward(net, ws, up, grad);
    adam_step(net, adam, grad);
  }
  CHECK(mse() < 1e-3);
  CHECK(steps <= 5000);
}

TEST_CASE("initialization is seed deterministic and bounded") {
  const auto c = config(4, {{20, Activation::relu}, {10, Activation::relu}}, 3);
  Rng r1(5), r2(5), r3(6);
  const auto a = Network::initialized(c, r1);
  CHECK(a == Network::initialized(c, r2));
  CHECK_FALSE(a == Network::initialized(c, r3));
  const double bound = std::sqrt(6.0 / 4.0);
  for (double w : a.weights(0)) CHECK(std::abs(w) <= bound);
  for (double b : a.biases(0)) CHECK(b == 0.0);
  CHECK(a.all_finite());
}

TEST_CASE("network and Adam JSON round trip") {
  Rng rng(8);
  const auto net = Network::initialized(config(3, {{7, Activation::softplus}}, 2), rng);
  CHECK(Network::from_json(net.to_json()) == net);
  CHECK(Network::from_json(nlohmann::json::parse(net.to_json().dump())) == net);
  auto adam = AdamState::for_network(net, 0.003);
  Network copy = net;
  std::vector<double> g(net.parameter_count(), 0.5);
  adam_step(copy, adam, g);
  CHECK(AdamState::from_json(nlohmann::json::parse(adam.to_json().dump())) == adam);
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(config(2, {{10, Activation::relu}}, 1).validate());
  CHECK_THROWS(config(0, {{10, Activation::relu}}, 1).validate());
  CHECK_THROWS(config(2, {{0, Activation::relu}}, 1).validate());
  CHECK_THROWS(config(2, {{5, Activation::relu}, {5, Activation::relu}, {5, Activation::relu}, {5, Activation::relu}}, 1).validate());
  CHECK(activation_from_string("selu") == Activation::selu);
  CHECK_THROWS(activation_from_string("tanh"));
}

TEST_CASE("scaler maps the box onto [-1, 1]") {
  const Scaler s({-2.0, 0.0}, {2.0, 10.0});
  CHECK(s.scale(std::vector<double>{-2.0, 0.0}) == std::vector<double>{-1.0, -1.0});
  CHECK(s.scale(std::vector<double>{2.0, 10.0}) == std::vector<double>{1.0, 1.0});
  CHECK(s.scale(std::vector<double>{0.0, 5.0}) == std::vector<double>{0.0, 0.0});
  CHECK(s.scale(std::vector<double>{4.0, 5.0})[0] == doctest::Approx(2.0));
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> x{rng.uniform(-5, 5), rng.uniform(-5, 15)};
    const auto back = s.unscale(s.scale(x));
    CHECK(std::abs(back[0] - x[0]) < 1e-12);
    CHECK(std::abs(back[1] - x[1]) < 1e-12);
  }
  CHECK_THROWS(Scaler({1.0}, {1.0}));
  CHECK(Scaler::from_json(s.to_json()) == s);
}
