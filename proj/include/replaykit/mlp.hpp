#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "replaykit/random.hpp"
#include "replaykit/transition.hpp"

namespace replaykit {

enum class Activation { kIdentity, kTanh, kRelu };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// Per-layer gradients with the same shapes as the network parameters.
struct MlpGradients {
  std::vector<DenseLayer> layers;
};

class Mlp;

/// Intermediates of one forward pass, consumed by Mlp::backward.
struct ForwardCache {
  const Mlp* owner = nullptr;
  std::uint64_t version = 0;
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
  Eigen::MatrixXd output;
};

/// Fully-connected network. Hidden layers share one activation; the output
/// layer is either the identity or output_scale * tanh. Batches are passed
/// column-wise: one column per sample.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<std::size_t> layer_sizes, Activation hidden, Activation output,
      double output_scale = 1.0);

  /// Weights and biases uniform in +-1/sqrt(fan_in); the final layer is
  /// additionally multiplied by `final_layer_scale`.
  static Mlp initialized(std::vector<std::size_t> layer_sizes, Activation hidden,
                         Activation output, Rng& rng, double output_scale = 1.0,
                         double final_layer_scale = 1.0);

  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }
  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  Activation hidden_activation() const { return hidden_; }
  Activation output_activation() const { return output_; }
  double output_scale() const { return output_scale_; }

  const std::vector<DenseLayer>& layers() const { return layers_; }
  /// Mutable access; invalidates outstanding forward caches.
  std::vector<DenseLayer>& mutable_layers();

  bool same_architecture(const Mlp& other) const;

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, ForwardCache* cache = nullptr) const;
  Vector forward(std::span<const double> input) const;

  /// Gradients of sum(output .* output_gradient) with respect to every
  /// parameter and, when `input_gradient` is non-null, to the input.
  MlpGradients backward(const ForwardCache& cache, const Eigen::MatrixXd& output_gradient,
                        Eigen::MatrixXd* input_gradient = nullptr) const;

  std::size_t parameter_count() const;

 private:
  std::vector<std::size_t> sizes_;
  Activation hidden_ = Activation::kRelu;
  Activation output_ = Activation::kIdentity;
  double output_scale_ = 1.0;
  std::vector<DenseLayer> layers_;
  std::uint64_t version_ = 0;
};

MlpGradients zeros_like(const Mlp& net);

/// target <- tau * online + (1 - tau) * target, elementwise.
void soft_update(Mlp& target, const Mlp& online, double tau);
/// target <- online, deep copy.
void hard_copy(Mlp& target, const Mlp& online);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, AdamConfig cfg);

  /// One bias-corrected Adam step. Throws NumericalError on non-finite
  /// gradients, leaving the parameters untouched.
  void step(Mlp& net, const MlpGradients& grads);

  std::int64_t steps() const { return steps_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  MlpGradients first_;
  MlpGradients second_;
  std::int64_t steps_ = 0;
};

/// Text checkpoint: a header line, layer sizes, activations, then each
/// layer's weight rows and bias in row-major order with 17 significant digits.
void save_mlp(std::ostream& out, const Mlp& net);
Mlp load_mlp(std::istream& in);

}  // namespace replaykit
