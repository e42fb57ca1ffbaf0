#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mfd/graph.hpp"
#include "mfd/tensor.hpp"

namespace mfd {

/// Fully connected ReLU network [d_in, h_1, ..., h_k, M]. The output of the
/// last hidden layer (after ReLU) is the penultimate feature tap.
struct MlpSpec {
  std::vector<std::size_t> layer_dims;

  static MlpSpec standard(std::size_t input_dim, std::size_t num_classes) {
    return MlpSpec{{input_dim, 64, 64, num_classes}};
  }

  void validate() const;
  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t num_classes() const { return layer_dims.back(); }
  std::size_t penultimate_dim() const { return layer_dims[layer_dims.size() - 2]; }
  std::size_t num_layers() const { return layer_dims.size() - 1; }

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

struct DenseLayer {
  Tensor weight;  // fan_in x fan_out
  Tensor bias;    // 1 x fan_out
};

struct MlpParams {
  MlpSpec spec;
  std::vector<DenseLayer> layers;

  std::size_t parameter_count() const;
  /// Weights then bias of each layer, in layer order.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  void validate() const;
};

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)); zero biases.
MlpParams init_params(const MlpSpec& spec, std::uint64_t seed);

struct MlpOutput {
  Tensor features;
  Tensor logits;
};

MlpOutput mlp_forward(const MlpParams& params, const Tensor& inputs);

/// Graph handles to one network's parameters.
struct MlpVars {
  MlpSpec spec;
  std::vector<Var> weights;
  std::vector<Var> biases;
};

/// Registers `params` in the graph, as parameters when `trainable` and as
/// constants otherwise.
MlpVars bind_parameters(Graph& graph, const MlpParams& params, bool trainable);

struct MlpNodes {
  Var features;
  Var logits;
};

MlpNodes mlp_forward(const MlpVars& vars, Var inputs);

/// Gradients from the last backward pass, in the same order as flatten().
std::vector<Tensor> collect_gradients(const MlpVars& vars);

}  // namespace mfd
