#include "irl/neuralnet.hpp"

#include <algorithm>
#include <cmath>

#include "irl/errors.hpp"
#include "irl/kernels.hpp"

namespace irl {
namespace {

constexpr double kSeluAlpha = 1.6732632423543772;
constexpr double kSeluScale = 1.0507009873554805;

double activate(Activation a, double x) {
  switch (a) {
    case Activation::relu:
      return x > 0.0 ? x : 0.0;
    case Activation::selu:
      return x > 0.0 ? kSeluScale * x : kSeluScale * kSeluAlpha * std::expm1(x);
    case Activation::softplus:
      // log(1 + e^x) without overflow.
      return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    case Activation::linear:
      return x;
  }
  return x;
}

double activate_derivative(Activation a, double x) {
  switch (a) {
    case Activation::relu:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::selu:
      return x > 0.0 ? kSeluScale : kSeluScale * kSeluAlpha * std::exp(x);
    case Activation::softplus:
      return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    case Activation::linear:
      return 1.0;
  }
  return 1.0;
}

void prepare(const Network& net, Workspace& ws) {
  const auto& layers = net.layers();
  if (ws.pre.size() != layers.size()) {
    ws.pre.resize(layers.size());
    ws.post.resize(layers.size() + 1);
  }
  ws.post[0].resize(net.input_dim());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    ws.pre[l].resize(layers[l].out);
    ws.post[l + 1].resize(layers[l].out);
  }
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::selu:
      return "selu";
    case Activation::softplus:
      return "softplus";
    case Activation::linear:
      return "linear";
  }
  return "?";
}

Activation activation_from_string(const std::string& text) {
  if (text == "relu") return Activation::relu;
  if (text == "selu") return Activation::selu;
  if (text == "softplus") return Activation::softplus;
  if (text == "linear") return Activation::linear;
  throw ConfigError("unknown activation '" + text + "'");
}

void NetConfig::validate() const {
  if (input_dim < 1 || output_dim < 1) throw ConfigError("network dimensions must be >= 1");
  if (hidden.size() > 3) throw ConfigError("at most 3 hidden layers are supported");
  for (const auto& h : hidden) {
    if (h.width < 1) throw ConfigError("hidden layer width must be >= 1");
    if (h.activation == Activation::linear) throw ConfigError("hidden layers need a nonlinearity");
  }
}

nlohmann::json to_json(const NetConfig& config) {
  nlohmann::json hidden = nlohmann::json::array();
  for (const auto& h : config.hidden) {
    hidden.push_back({{"width", h.width}, {"activation", to_string(h.activation)}});
  }
  return {{"input_dim", config.input_dim}, {"hidden", hidden}, {"output_dim", config.output_dim}};
}

NetConfig net_config_from_json(const nlohmann::json& doc) {
  NetConfig c;
  c.input_dim = doc.at("input_dim").get<int>();
  c.output_dim = doc.at("output_dim").get<int>();
  for (const auto& h : doc.at("hidden")) {
    c.hidden.push_back({h.at("width").get<int>(),
                        activation_from_string(h.at("activation").get<std::string>())});
  }
  c.validate();
  return c;
}

Network::Network(NetConfig config) : config_(std::move(config)) {
  config_.validate();
  std::size_t in = input_dim(), offset = 0;
  auto add = [&](std::size_t out, Activation act) {
    Layer layer{in, out, offset, offset + in * out, act};
    offset += in * out + out;
    layers_.push_back(layer);
    in = out;
  };
  for (const auto& h : config_.hidden) add(static_cast<std::size_t>(h.width), h.activation);
  add(output_dim(), Activation::linear);
  params_.assign(offset, 0.0);
}

Network Network::initialized(NetConfig config, Rng& rng) {
  Network net(std::move(config));
  for (std::size_t l = 0; l < net.layers_.size(); ++l) {
    const auto& layer = net.layers_[l];
    const bool output = l + 1 == net.layers_.size();
    const double bound = std::sqrt((output ? 3.0 : 6.0) / static_cast<double>(layer.in));
    for (double& w : net.weights(l)) w = rng.uniform(-bound, bound);
  }
  return net;
}

std::span<double> Network::weights(std::size_t layer) {
  const auto& l = layers_.at(layer);
  return std::span<double>(params_).subspan(l.weight_offset, l.in * l.out);
}
std::span<const double> Network::weights(std::size_t layer) const {
  const auto& l = layers_.at(layer);
  return std::span<const double>(params_).subspan(l.weight_offset, l.in * l.out);
}
std::span<double> Network::biases(std::size_t layer) {
  const auto& l = layers_.at(layer);
  return std::span<double>(params_).subspan(l.bias_offset, l.out);
}
std::span<const double> Network::biases(std::size_t layer) const {
  const auto& l = layers_.at(layer);
  return std::span<const double>(params_).subspan(l.bias_offset, l.out);
}

bool Network::all_finite() const {
  return std::all_of(params_.begin(), params_.end(), [](double p) { return std::isfinite(p); });
}

nlohmann::json Network::to_json() const {
  return {{"config", irl::to_json(config_)}, {"parameters", params_}};
}

Network Network::from_json(const nlohmann::json& doc) {
  Network net(net_config_from_json(doc.at("config")));
  auto params = doc.at("parameters").get<std::vector<double>>();
  if (params.size() != net.params_.size()) {
    throw ConfigError("network checkpoint: parameter count does not match its config");
  }
  net.params_ = std::move(params);
  return net;
}

std::span<const double> forward(const Network& net, std::span<const double> x, Workspace& ws) {
  if (x.size() != net.input_dim()) {
    throw DomainError("network input has " + std::to_string(x.size()) + " entries, expected " +
                      std::to_string(net.input_dim()));
  }
  prepare(net, ws);
  std::copy(x.begin(), x.end(), ws.post[0].begin());
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    kernels::gemv(net.weights(l), ws.post[l], net.biases(l), ws.pre[l]);
    const auto act = layers[l].activation;
    auto& out = ws.post[l + 1];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = activate(act, ws.pre[l][i]);
  }
  return ws.post.back();
}

std::vector<double> forward(const Network& net, std::span<const double> x) {
  Workspace ws;
  const auto y = forward(net, x, ws);
  return {y.begin(), y.end()};
}

void backward(const Network& net, Workspace& ws, std::span<const double> upstream,
              std::span<double> gradient) {
  if (upstream.size() != net.output_dim()) throw DomainError("upstream gradient has wrong size");
  if (gradient.size() != net.parameter_count()) throw DomainError("gradient buffer has wrong size");
  const auto& layers = net.layers();
  if (ws.post.size() != layers.size() + 1) throw UsageError("backward() needs a prior forward()");
  ws.delta.assign(upstream.begin(), upstream.end());
  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    // The output layer is linear; hidden-layer deltas were already multiplied
    // by the activation derivative below.
    kernels::outer(gradient.subspan(layer.weight_offset, layer.in * layer.out), ws.delta,
                   ws.post[l]);
    std::copy(ws.delta.begin(), ws.delta.end(), gradient.begin() + layer.bias_offset);
    if (l == 0) break;
    ws.delta_prev.resize(layer.in);
    kernels::gemv_t(net.weights(l), ws.delta, ws.delta_prev);
    const auto act = layers[l - 1].activation;
    for (std::size_t i = 0; i < layer.in; ++i) {
      ws.delta_prev[i] *= activate_derivative(act, ws.pre[l - 1][i]);
    }
    std::swap(ws.delta, ws.delta_prev);
  }
}

std::vector<double> backward(const Network& net, std::span<const double> x,
                             std::span<const double> upstream) {
  Workspace ws;
  forward(net, x, ws);
  std::vector<double> g(net.parameter_count());
  backward(net, ws, upstream, g);
  return g;
}

AdamState AdamState::for_network(const Network& net, double lr) {
  AdamState s;
  s.first_moment.assign(net.parameter_count(), 0.0);
  s.second_moment.assign(net.parameter_count(), 0.0);
  s.lr = lr;
  return s;
}

nlohmann::json AdamState::to_json() const {
  return {{"step", step},   {"lr", lr},   {"beta1", beta1},
          {"beta2", beta2}, {"eps", eps}, {"first_moment", first_moment},
          {"second_moment", second_moment}};
}

AdamState AdamState::from_json(const nlohmann::json& doc) {
  AdamState s;
  s.step = doc.at("step").get<std::uint64_t>();
  s.lr = doc.at("lr").get<double>();
  s.beta1 = doc.at("beta1").get<double>();
  s.beta2 = doc.at("beta2").get<double>();
  s.eps = doc.at("eps").get<double>();
  s.first_moment = doc.at("first_moment").get<std::vector<double>>();
  s.second_moment = doc.at("second_moment").get<std::vector<double>>();
  return s;
}

void adam_step(Network& net, AdamState& adam, std::span<const double> gradient) {
  if (gradient.size() != net.parameter_count() ||
      adam.first_moment.size() != net.parameter_count() ||
      adam.second_moment.size() != net.parameter_count()) {
    throw DomainError("Adam state/gradient shape does not match the network");
  }
  for (std::size_t i = 0; i < gradient.size(); ++i) {
    if (!std::isfinite(gradient[i])) {
      throw TrainingError("non-finite gradient at parameter " + std::to_string(i) +
                          " (Adam step " + std::to_string(adam.step + 1) + ")");
    }
  }
  ++adam.step;
  const double t = static_cast<double>(adam.step);
  const kernels::AdamCoeffs c{adam.lr,
                              adam.beta1,
                              adam.beta2,
                              adam.eps,
                              1.0 - std::pow(adam.beta1, t),
                              1.0 - std::pow(adam.beta2, t)};
  kernels::adam(net.parameters(), adam.first_moment, adam.second_moment, gradient, c);
}

Scaler::Scaler(std::vector<double> min, std::vector<double> max)
    : min_(std::move(min)), max_(std::move(max)) {
  if (min_.size() != max_.size()) throw ConfigError("scaler: min/max size mismatch");
  for (std::size_t i = 0; i < min_.size(); ++i) {
    if (!(min_[i] < max_[i])) throw ConfigError("scaler: min < max required per dimension");
  }
}

void Scaler::scale(std::span<const double> x, std::span<double> out) const {
  if (x.size() != size() || out.size() != size()) throw DomainError("scaler dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = 2.0 * (x[i] - min_[i]) / (max_[i] - min_[i]) - 1.0;
  }
}

void Scaler::unscale(std::span<const double> y, std::span<double> out) const {
  if (y.size() != size() || out.size() != size()) throw DomainError("scaler dimension mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) {
    out[i] = min_[i] + (y[i] + 1.0) * 0.5 * (max_[i] - min_[i]);
  }
}

std::vector<double> Scaler::scale(std::span<const double> x) const {
  std::vector<double> out(x.size());
  scale(x, out);
  return out;
}

std::vector<double> Scaler::unscale(std::span<const double> y) const {
  std::vector<double> out(y.size());
  unscale(y, out);
  return out;
}

nlohmann::json Scaler::to_json() const { return {{"min", min_}, {"max", max_}}; }

Scaler Scaler::from_json(const nlohmann::json& doc) {
  return Scaler(doc.at("min").get<std::vector<double>>(), doc.at("max").get<std::vector<double>>());
}

}  // namespace irl
