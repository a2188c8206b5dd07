#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "irl/rng.hpp"

namespace irl {

enum class Activation { relu, selu, softplus, linear };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& text);

struct LayerSpec {
  int width = 0;
  Activation activation = Activation::relu;

  bool operator==(const LayerSpec&) const = default;
};

// Fully connected network with a linear output layer. Zero hidden layers
// gives a single affine map.
struct NetConfig {
  int input_dim = 0;
  std::vector<LayerSpec> hidden;
  int output_dim = 0;

  void validate() const;
  bool operator==(const NetConfig&) const = default;
};

nlohmann::json to_json(const NetConfig& config);
NetConfig net_config_from_json(const nlohmann::json& doc);

// Scratch buffers for one forward/backward pass.
struct Workspace {
  std::vector<std::vector<double>> pre;   // pre-activation per layer
  std::vector<std::vector<double>> post;  // post[0] = input, post[l+1] = layer l output
  std::vector<double> delta;
  std::vector<double> delta_prev;
};

class Network {
 public:
  struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t weight_offset = 0;  // out x in, row-major
    std::size_t bias_offset = 0;
    Activation activation = Activation::linear;
  };

  Network() = default;
  // Zero-initialized parameters.
  explicit Network(NetConfig config);
  // Fan-in scaled uniform weights (He-uniform for hidden layers, LeCun-uniform
  // for the output layer), zero biases.
  static Network initialized(NetConfig config, Rng& rng);

  const NetConfig& config() const { return config_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::span<double> weights(std::size_t layer);
  std::span<const double> weights(std::size_t layer) const;
  std::span<double> biases(std::size_t layer);
  std::span<const double> biases(std::size_t layer) const;

  std::size_t input_dim() const { return static_cast<std::size_t>(config_.input_dim); }
  std::size_t output_dim() const { return static_cast<std::size_t>(config_.output_dim); }

  bool all_finite() const;

  nlohmann::json to_json() const;
  static Network from_json(const nlohmann::json& doc);

  bool operator==(const Network& other) const {
    return config_ == other.config_ && params_ == other.params_;
  }

 private:
  NetConfig config_;
  std::vector<Layer> layers_;
  std::vector<double> params_;
};

// Evaluates the network; the returned span aliases ws.post.back().
std::span<const double> forward(const Network& net, std::span<const double> x, Workspace& ws);
std::vector<double> forward(const Network& net, std::span<const double> x);

// Gradient of dot(output, upstream) with respect to every parameter, laid out
// like Network::parameters(). ws must hold the forward pass for the same input.
void backward(const Network& net, Workspace& ws, std::span<const double> upstream,
              std::span<double> gradient);
std::vector<double> backward(const Network& net, std::span<const double> x,
                             std::span<const double> upstream);

struct AdamState {
  std::uint64_t step = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_network(const Network& net, double lr);
  nlohmann::json to_json() const;
  static AdamState from_json(const nlohmann::json& doc);
  bool operator==(const AdamState&) const = default;
};

// Bias-corrected Adam update. Throws TrainingError on a non-finite gradient.
void adam_step(Network& net, AdamState& adam, std::span<const double> gradient);

// Per-dimension affine map of [min, max] onto [-1, 1].
class Scaler {
 public:
  Scaler() = default;
  Scaler(std::vector<double> min, std::vector<double> max);

  std::size_t size() const { return min_.size(); }
  const std::vector<double>& min() const { return min_; }
  const std::vector<double>& max() const { return max_; }

  void scale(std::span<const double> x, std::span<double> out) const;
  void unscale(std::span<const double> y, std::span<double> out) const;
  std::vector<double> scale(std::span<const double> x) const;
  std::vector<double> unscale(std::span<const double> y) const;

  nlohmann::json to_json() const;
  static Scaler from_json(const nlohmann::json& doc);
  bool operator==(const Scaler&) const = default;

 private:
  std::vector<double> min_;
  std::vector<double> max_;
};

}  // namespace irl
