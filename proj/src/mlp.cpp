#include "replaykit/mlp.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "replaykit/errors.hpp"

namespace replaykit {

namespace {

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation a, double scale) {
  switch (a) {
    case Activation::kIdentity:
      return z;
    case Activation::kTanh:
      return scale * z.array().tanh().matrix();
    case Activation::kRelu:
      return z.cwiseMax(0.0);
  }
  return z;
}

// dL/dz given dL/da and the pre-activation z.
Eigen::MatrixXd activation_backward(const Eigen::MatrixXd& z, const Eigen::MatrixXd& grad,
                                    Activation a, double scale) {
  switch (a) {
    case Activation::kIdentity:
      return grad;
    case Activation::kTanh: {
      const Eigen::ArrayXXd t = z.array().tanh();
      return (grad.array() * scale * (1.0 - t * t)).matrix();
    }
    case Activation::kRelu:
      return (grad.array() * (z.array() > 0.0).cast<double>()).matrix();
  }
  return grad;
}

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string("non-finite values in ") + what);
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kTanh:
      return "tanh";
    case Activation::kRelu:
      return "relu";
  }
  return "identity";
}

Activation parse_activation(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw ConfigError("unknown activation '" + name + "'");
}

Mlp::Mlp(std::vector<std::size_t> layer_sizes, Activation hidden, Activation output,
         double output_scale)
    : sizes_(std::move(layer_sizes)), hidden_(hidden), output_(output), output_scale_(output_scale) {
  if (sizes_.size() < 2) throw ShapeError("an mlp needs at least an input and an output size");
  for (std::size_t s : sizes_) {
    if (s == 0) throw ShapeError("mlp layer sizes must be positive");
  }
  layers_.reserve(sizes_.size() - 1);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const auto rows = static_cast<Eigen::Index>(sizes_[l + 1]);
    const auto cols = static_cast<Eigen::Index>(sizes_[l]);
    layers_.push_back(DenseLayer{Eigen::MatrixXd::Zero(rows, cols), Eigen::VectorXd::Zero(rows)});
  }
}

Mlp Mlp::initialized(std::vector<std::size_t> layer_sizes, Activation hidden, Activation output,
                     Rng& rng, double output_scale, double final_layer_scale) {
  Mlp net(std::move(layer_sizes), hidden, output, output_scale);
  for (std::size_t l = 0; l < net.layers_.size(); ++l) {
    DenseLayer& layer = net.layers_[l];
    double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    if (l + 1 == net.layers_.size()) bound *= final_layer_scale;
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = uniform(rng, -bound, bound);
      }
      layer.bias(r) = uniform(rng, -bound, bound);
    }
  }
  return net;
}

std::vector<DenseLayer>& Mlp::mutable_layers() {
  ++version_;
  return layers_;
}

bool Mlp::same_architecture(const Mlp& other) const {
  return sizes_ == other.sizes_ && hidden_ == other.hidden_ && output_ == other.output_ &&
         output_scale_ == other.output_scale_;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input, ForwardCache* cache) const {
  if (layers_.empty()) throw ShapeError("forward on an empty network");
  if (static_cast<std::size_t>(input.rows()) != input_dim()) {
    throw ShapeError("mlp input has dimension " + std::to_string(input.rows()) + ", expected " +
                     std::to_string(input_dim()));
  }
  if (cache) {
    cache->owner = this;
    cache->version = version_;
    cache->inputs.clear();
    cache->pre.clear();
  }
  Eigen::MatrixXd a = input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    Eigen::MatrixXd z = layer.weight * a;
    z.colwise() += layer.bias;
    const bool last = l + 1 == layers_.size();
    Eigen::MatrixXd next = last ? activate(z, output_, output_scale_) : activate(z, hidden_, 1.0);
    if (cache) {
      cache->inputs.push_back(std::move(a));
      cache->pre.push_back(std::move(z));
    }
    a = std::move(next);
  }
  require_finite(a, "mlp output");
  if (cache) cache->output = a;
  return a;
}

Vector Mlp::forward(std::span<const double> input) const {
  const Eigen::Map<const Eigen::VectorXd> x(input.data(), static_cast<Eigen::Index>(input.size()));
  const Eigen::MatrixXd y = forward(Eigen::MatrixXd(x));
  return Vector(y.data(), y.data() + y.size());
}

MlpGradients Mlp::backward(const ForwardCache& cache, const Eigen::MatrixXd& output_gradient,
                           Eigen::MatrixXd* input_gradient) const {
  if (cache.owner != this || cache.version != version_ || cache.pre.size() != layers_.size()) {
    throw IntegrityError("forward cache does not belong to the current parameters");
  }
  if (output_gradient.rows() != cache.output.rows() ||
      output_gradient.cols() != cache.output.cols()) {
    throw ShapeError("output gradient shape does not match the forward output");
  }
  MlpGradients grads;
  grads.layers.resize(layers_.size());
  Eigen::MatrixXd upstream = output_gradient;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const bool last = i + 1 == layers_.size();
    const Eigen::MatrixXd dz = last ? activation_backward(cache.pre[i], upstream, output_, output_scale_)
                                    : activation_backward(cache.pre[i], upstream, hidden_, 1.0);
    grads.layers[i].weight = dz * cache.inputs[i].transpose();
    grads.layers[i].bias = dz.rowwise().sum();
    if (i > 0 || input_gradient) upstream = layers_[i].weight.transpose() * dz;
  }
  if (input_gradient) *input_gradient = std::move(upstream);
  return grads;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
  return n;
}

MlpGradients zeros_like(const Mlp& net) {
  MlpGradients g;
  for (const auto& layer : net.layers()) {
    g.layers.push_back(DenseLayer{Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()),
                                  Eigen::VectorXd::Zero(layer.bias.size())});
  }
  return g;
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (!target.same_architecture(online)) throw ShapeError("soft update between different architectures");
  if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("soft update tau must lie in [0, 1]");
  auto& dst = target.mutable_layers();
  const auto& src = online.layers();
  for (std::size_t l = 0; l < dst.size(); ++l) {
    dst[l].weight = tau * src[l].weight + (1.0 - tau) * dst[l].weight;
    dst[l].bias = tau * src[l].bias + (1.0 - tau) * dst[l].bias;
  }
}

void hard_copy(Mlp& target, const Mlp& online) {
  if (!target.same_architecture(online)) throw ShapeError("hard copy between different architectures");
  auto& dst = target.mutable_layers();
  const auto& src = online.layers();
  for (std::size_t l = 0; l < dst.size(); ++l) {
    dst[l].weight = src[l].weight;
    dst[l].bias = src[l].bias;
  }
}

Adam::Adam(const Mlp& net, AdamConfig cfg)
    : cfg_(cfg), first_(zeros_like(net)), second_(zeros_like(net)) {
  if (!(cfg_.learning_rate > 0.0)) throw ConfigError("adam learning rate must be positive");
}

void Adam::step(Mlp& net, const MlpGradients& grads) {
  if (grads.layers.size() != first_.layers.size()) throw ShapeError("gradient layer count mismatch");
  for (std::size_t l = 0; l < grads.layers.size(); ++l) {
    const auto& g = grads.layers[l];
    if (g.weight.rows() != first_.layers[l].weight.rows() ||
        g.weight.cols() != first_.layers[l].weight.cols() ||
        g.bias.size() != first_.layers[l].bias.size()) {
      throw ShapeError("gradient shape mismatch in layer " + std::to_string(l));
    }
    if (!g.weight.allFinite() || !g.bias.allFinite()) {
      throw NumericalError("non-finite gradient in layer " + std::to_string(l));
    }
  }
  ++steps_;
  const double b1 = cfg_.beta1, b2 = cfg_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double lr = cfg_.learning_rate, eps = cfg_.epsilon;
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = (b2 * v.array() + (1.0 - b2) * g.array().square()).matrix();
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  auto& layers = net.mutable_layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weight, grads.layers[l].weight, first_.layers[l].weight, second_.layers[l].weight);
    update(layers[l].bias, grads.layers[l].bias, first_.layers[l].bias, second_.layers[l].bias);
  }
}

void save_mlp(std::ostream& out, const Mlp& net) {
  out << "mlp " << net.layer_sizes().size() << "\n";
  out << "sizes";
  for (std::size_t s : net.layer_sizes()) out << ' ' << s;
  out << "\n";
  out << "activations " << to_string(net.hidden_activation()) << ' '
      << to_string(net.output_activation()) << "\n";
  out << std::setprecision(17);
  out << "output_scale " << net.output_scale() << "\n";
  for (const auto& layer : net.layers()) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        if (c > 0) out << ' ';
        out << layer.weight(r, c);
      }
      out << "\n";
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
      if (r > 0) out << ' ';
      out << layer.bias(r);
    }
    out << "\n";
  }
  if (!out) throw IoError("failed to write mlp checkpoint");
}

Mlp load_mlp(std::istream& in) {
  std::string tag;
  std::size_t n = 0;
  if (!(in >> tag >> n) || tag != "mlp" || n < 2) throw IoError("malformed mlp checkpoint header");
  if (!(in >> tag) || tag != "sizes") throw IoError("mlp checkpoint missing layer sizes");
  std::vector<std::size_t> sizes(n);
  for (auto& s : sizes) {
    if (!(in >> s)) throw IoError("mlp checkpoint has truncated layer sizes");
  }
  std::string hidden, output;
  if (!(in >> tag >> hidden >> output) || tag != "activations") {
    throw IoError("mlp checkpoint missing activations");
  }
  double scale = 1.0;
  if (!(in >> tag >> scale) || tag != "output_scale") throw IoError("mlp checkpoint missing output scale");
  Mlp net(sizes, parse_activation(hidden), parse_activation(output), scale);
  for (auto& layer : net.mutable_layers()) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        if (!(in >> layer.weight(r, c))) throw IoError("mlp checkpoint has truncated weights");
      }
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
      if (!(in >> layer.bias(r))) throw IoError("mlp checkpoint has truncated biases");
    }
  }
  return net;
}

}  // namespace replaykit
