#include "mfd/mlp.hpp"

#include <cmath>
#include <string>

#include "mfd/errors.hpp"
#include "mfd/random.hpp"

namespace mfd {

void MlpSpec::validate() const {
  if (layer_dims.size() < 3) throw ParameterError("MlpSpec: need at least one hidden layer");
  for (std::size_t d : layer_dims) {
    if (d < 1) throw ParameterError("MlpSpec: every layer dimension must be >= 1");
  }
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<double> MlpParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers) {
    flat.insert(flat.end(), l.weight.values().begin(), l.weight.values().end());
    flat.insert(flat.end(), l.bias.values().begin(), l.bias.values().end());
  }
  return flat;
}

void MlpParams::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw ShapeError("MlpParams::assign: wrong parameter count");
  std::size_t pos = 0;
  for (auto& l : layers) {
    for (double& v : l.weight.values()) v = flat[pos++];
    for (double& v : l.bias.values()) v = flat[pos++];
  }
}

void MlpParams::validate() const {
  spec.validate();
  if (layers.size() != spec.num_layers()) throw ShapeError("MlpParams: layer count differs from spec");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.weight.shape() != std::vector<std::size_t>{spec.layer_dims[i], spec.layer_dims[i + 1]} ||
        l.bias.shape() != std::vector<std::size_t>{1, spec.layer_dims[i + 1]}) {
      throw ShapeError("MlpParams: layer " + std::to_string(i) + " shape differs from spec");
    }
  }
}

MlpParams init_params(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed, stream::kInit);
  MlpParams p{spec, {}};
  for (std::size_t i = 0; i + 1 < spec.layer_dims.size(); ++i) {
    const std::size_t fan_in = spec.layer_dims[i], fan_out = spec.layer_dims[i + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseLayer layer{Tensor(fan_in, fan_out), Tensor(1, fan_out, 0.0)};
    for (double& w : layer.weight.values()) w = rng.uniform(-bound, bound);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

MlpOutput mlp_forward(const MlpParams& params, const Tensor& inputs) {
  if (inputs.rank() != 2 || inputs.cols() != params.spec.input_dim()) {
    throw ShapeError("mlp_forward: input width differs from the network input dimension");
  }
  Tensor h = inputs;
  const std::size_t hidden = params.layers.size() - 1;
  for (std::size_t i = 0; i < hidden; ++i) {
    h = relu(add_row(matmul(h, params.layers[i].weight), params.layers[i].bias));
  }
  Tensor logits = add_row(matmul(h, params.layers.back().weight), params.layers.back().bias);
  return {std::move(h), std::move(logits)};
}

MlpVars bind_parameters(Graph& graph, const MlpParams& params, bool trainable) {
  MlpVars vars{params.spec, {}, {}};
  for (const auto& l : params.layers) {
    vars.weights.push_back(trainable ? graph.parameter(l.weight) : graph.constant(l.weight));
    vars.biases.push_back(trainable ? graph.parameter(l.bias) : graph.constant(l.bias));
  }
  return vars;
}

MlpNodes mlp_forward(const MlpVars& vars, Var inputs) {
  if (inputs.value().rank() != 2 || inputs.value().cols() != vars.spec.input_dim()) {
    throw ShapeError("mlp_forward: input width differs from the network input dimension");
  }
  Var h = inputs;
  const std::size_t hidden = vars.weights.size() - 1;
  for (std::size_t i = 0; i < hidden; ++i) {
    h = relu(add_row_bias(matmul(h, vars.weights[i]), vars.biases[i]));
  }
  Var logits = add_row_bias(matmul(h, vars.weights.back()), vars.biases.back());
  return {h, logits};
}

std::vector<Tensor> collect_gradients(const MlpVars& vars) {
  std::vector<Tensor> grads;
  for (std::size_t i = 0; i < vars.weights.size(); ++i) {
    grads.push_back(vars.weights[i].grad());
    grads.push_back(vars.biases[i].grad());
  }
  return grads;
}

}  // namespace mfd
