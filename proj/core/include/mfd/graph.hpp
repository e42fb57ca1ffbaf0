#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mfd/tensor.hpp"

namespace mfd {

enum class OpTag : std::uint8_t {
  kParameter,
  kConstant,
  kMatMul,
  kAddRowBias,
  kAdd,
  kSub,
  kScale,
  kRelu,
  kExp,
  kSum,
  kMean,
  kSumSquares,
  kPairwiseSqDist,
  kGatherRows,
  kSoftmaxCrossEntropy,
  kSoftenedKl,
};

class Graph;
namespace detail {
struct GraphAccess;
}

/// Handle to a node of a Graph. Cheap to copy; valid while its graph lives.
class Var {
 public:
  Var() = default;

  Graph* graph() const { return graph_; }
  std::size_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

  const Tensor& value() const;
  const Tensor& grad() const;

 private:
  friend class Graph;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Tape of differentiable tensor expressions.
///
/// Nodes are appended in evaluation order, so the tape is topologically
/// sorted by construction. Each node caches its forward value. backward()
/// zeroes every gradient, seeds the scalar output with 1 and walks the tape
/// once in reverse, accumulating into inputs additively so fan-out sums.
///
/// Only nodes that transitively depend on a parameter carry gradients;
/// constants (including detached copies) are skipped during backward.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) = delete;
  Graph& operator=(Graph&&) = delete;

  /// Leaf that receives a gradient.
  Var parameter(Tensor value);
  /// Leaf that never receives a gradient.
  Var constant(Tensor value);
  /// Constant copy of `v`'s current value: a stop-gradient.
  Var detach(Var v);

  const Tensor& value(Var v) const;
  const Tensor& grad(Var v) const;
  OpTag op(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  void zero_grad();
  /// Reverse-mode pass from a single-element output. Throws ContractError if
  /// the output is not scalar or belongs to another graph.
  void backward(Var output);

 private:
  friend struct detail::GraphAccess;

  struct Node {
    OpTag op = OpTag::kConstant;
    std::array<std::size_t, 2> inputs{};
    std::uint8_t num_inputs = 0;
    bool requires_grad = false;
    Tensor value;
    Tensor grad;
    double scalar = 0.0;               // kScale factor, kSoftenedKl temperature
    std::vector<std::size_t> indices;  // gathered rows or class labels
    Tensor aux;                        // cached softmax probabilities
  };

  Var push(Node node);
  void check_owned(Var v) const;
  void propagate(std::size_t id);

  std::vector<Node> nodes_;
};

// Differentiable operations. Inputs must belong to the same graph.

Var matmul(Var a, Var b);
/// a (n x m) plus a 1 x m bias broadcast over rows.
Var add_row_bias(Var a, Var bias);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double factor);
Var relu(Var a);
Var exp(Var a);
Var sum(Var a);
Var mean(Var a);
Var sum_squares(Var a);
Var pairwise_sqdist(Var x, Var y);
Var gather_rows(Var x, std::span<const std::size_t> indices);
/// Mean over rows of -log softmax(logits)[label], stabilised by row-max
/// subtraction. Throws DomainError on out-of-range labels.
Var softmax_cross_entropy(Var logits, std::span<const int> labels);
/// Mean over rows of KL(softmax(teacher / T) || softmax(student / T)).
/// The teacher side is a constant.
Var softened_kl(Var student_logits, const Tensor& teacher_logits, double temperature);

}  // namespace mfd
