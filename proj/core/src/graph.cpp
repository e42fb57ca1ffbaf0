#include "mfd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfd/errors.hpp"

namespace mfd {

namespace detail {

struct GraphAccess {
  using Node = Graph::Node;

  static Graph& owner(Var a) {
    if (!a.valid()) throw ContractError("operation on an unbound Var");
    return *a.graph();
  }

  static Graph& owner(Var a, Var b) {
    Graph& g = owner(a);
    if (b.graph() != &g) throw ContractError("operands belong to different graphs");
    return g;
  }

  static const Node& node(Var v) { return v.graph()->nodes_[v.id()]; }

  static Var push(Graph& g, OpTag op, Tensor value, std::initializer_list<Var> inputs) {
    Node n;
    n.op = op;
    n.value = std::move(value);
    for (Var in : inputs) {
      n.inputs[n.num_inputs++] = in.id();
      n.requires_grad = n.requires_grad || g.nodes_[in.id()].requires_grad;
    }
    return g.push(std::move(n));
  }

  static Var push(Graph& g, Node n) { return g.push(std::move(n)); }

  static Node make(Graph& g, OpTag op, Tensor value, std::initializer_list<Var> inputs) {
    Node n;
    n.op = op;
    n.value = std::move(value);
    for (Var in : inputs) {
      n.inputs[n.num_inputs++] = in.id();
      n.requires_grad = n.requires_grad || g.nodes_[in.id()].requires_grad;
    }
    return n;
  }
};

}  // namespace detail

using detail::GraphAccess;

const Tensor& Var::value() const {
  if (!graph_) throw ContractError("value() on an unbound Var");
  return graph_->value(*this);
}

const Tensor& Var::grad() const {
  if (!graph_) throw ContractError("grad() on an unbound Var");
  return graph_->grad(*this);
}

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Graph::check_owned(Var v) const {
  if (v.graph() != this || v.id() >= nodes_.size()) {
    throw ContractError("Var does not belong to this graph");
  }
}

Var Graph::parameter(Tensor value) {
  Node n;
  n.op = OpTag::kParameter;
  n.requires_grad = true;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Graph::constant(Tensor value) {
  Node n;
  n.op = OpTag::kConstant;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Graph::detach(Var v) {
  check_owned(v);
  return constant(nodes_[v.id()].value);
}

const Tensor& Graph::value(Var v) const {
  check_owned(v);
  return nodes_[v.id()].value;
}

const Tensor& Graph::grad(Var v) const {
  check_owned(v);
  const Node& n = nodes_[v.id()];
  if (!n.requires_grad) throw ContractError("node does not carry a gradient");
  if (n.grad.size() != n.value.size()) throw ContractError("gradient requested before backward()");
  return n.grad;
}

OpTag Graph::op(Var v) const {
  check_owned(v);
  return nodes_[v.id()].op;
}

bool Graph::requires_grad(Var v) const {
  check_owned(v);
  return nodes_[v.id()].requires_grad;
}

void Graph::zero_grad() {
  for (Node& n : nodes_) {
    if (!n.requires_grad) continue;
    if (n.grad.same_shape(n.value)) {
      n.grad.fill(0.0);
    } else {
      n.grad = Tensor::zeros_like(n.value);
    }
  }
}

void Graph::backward(Var output) {
  check_owned(output);
  const Node& out = nodes_[output.id()];
  if (out.value.size() != 1) {
    throw ContractError("backward() requires a scalar output");
  }
  zero_grad();
  if (!out.requires_grad) return;
  nodes_[output.id()].grad.values()[0] = 1.0;
  for (std::size_t id = output.id() + 1; id-- > 0;) {
    if (nodes_[id].requires_grad) propagate(id);
  }
}

void Graph::propagate(std::size_t id) {
  Node& n = nodes_[id];
  const Tensor& g = n.grad;
  auto input = [&](int k) -> Node& { return nodes_[n.inputs[static_cast<std::size_t>(k)]]; };
  auto accumulate = [](Node& dst, const Tensor& delta) {
    auto d = dst.grad.values();
    auto s = delta.values();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
  };

  switch (n.op) {
    case OpTag::kParameter:
    case OpTag::kConstant:
      break;

    case OpTag::kMatMul: {
      Node& a = input(0);
      Node& b = input(1);
      if (a.requires_grad) accumulate(a, matmul_nt(g, b.value));
      if (b.requires_grad) accumulate(b, matmul_tn(a.value, g));
      break;
    }

    case OpTag::kAddRowBias: {
      Node& a = input(0);
      Node& bias = input(1);
      if (a.requires_grad) accumulate(a, g);
      if (bias.requires_grad) {
        const std::size_t rows = g.rows(), cols = g.cols();
        auto gb = bias.grad.values();
        for (std::size_t i = 0; i < rows; ++i) {
          for (std::size_t j = 0; j < cols; ++j) gb[j] += g(i, j);
        }
      }
      break;
    }

    case OpTag::kAdd:
    case OpTag::kSub: {
      Node& a = input(0);
      Node& b = input(1);
      if (a.requires_grad) accumulate(a, g);
      if (b.requires_grad) {
        const double sign = n.op == OpTag::kAdd ? 1.0 : -1.0;
        auto gb = b.grad.values();
        auto gs = g.values();
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += sign * gs[i];
      }
      break;
    }

    case OpTag::kScale: {
      Node& a = input(0);
      auto ga = a.grad.values();
      auto gs = g.values();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += n.scalar * gs[i];
      break;
    }

    case OpTag::kRelu: {
      Node& a = input(0);
      auto ga = a.grad.values();
      auto gs = g.values();
      auto x = a.value.values();
      for (std::size_t i = 0; i < ga.size(); ++i) {
        if (x[i] > 0.0) ga[i] += gs[i];
      }
      break;
    }

    case OpTag::kExp: {
      Node& a = input(0);
      auto ga = a.grad.values();
      auto gs = g.values();
      auto y = n.value.values();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gs[i] * y[i];
      break;
    }

    case OpTag::kSum:
    case OpTag::kMean: {
      Node& a = input(0);
      double upstream = g.values()[0];
      if (n.op == OpTag::kMean) upstream /= static_cast<double>(a.value.size());
      for (double& v : a.grad.values()) v += upstream;
      break;
    }

    case OpTag::kSumSquares: {
      Node& a = input(0);
      const double upstream = g.values()[0];
      auto ga = a.grad.values();
      auto x = a.value.values();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += 2.0 * upstream * x[i];
      break;
    }

    case OpTag::kPairwiseSqDist: {
      // D_ij = |x_i - y_j|^2
      // dX = 2 (diag(rowsum G) X - G Y),  dY = 2 (diag(colsum G) Y - G^T X)
      Node& x = input(0);
      Node& y = input(1);
      const std::size_t rows_x = x.value.rows(), rows_y = y.value.rows(), d = x.value.cols();
      if (x.requires_grad) {
        const Tensor gy = matmul(g, y.value);
        for (std::size_t i = 0; i < rows_x; ++i) {
          double w = 0.0;
          for (std::size_t j = 0; j < rows_y; ++j) w += g(i, j);
          auto xi = x.value.row(i);
          auto gx = x.grad.row(i);
          auto m = gy.row(i);
          for (std::size_t k = 0; k < d; ++k) gx[k] += 2.0 * (w * xi[k] - m[k]);
        }
      }
      if (y.requires_grad) {
        const Tensor gx = matmul_tn(g, x.value);
        std::vector<double> w(rows_y, 0.0);
        for (std::size_t i = 0; i < rows_x; ++i) {
          for (std::size_t j = 0; j < rows_y; ++j) w[j] += g(i, j);
        }
        for (std::size_t j = 0; j < rows_y; ++j) {
          auto yj = y.value.row(j);
          auto gy = y.grad.row(j);
          auto m = gx.row(j);
          for (std::size_t k = 0; k < d; ++k) gy[k] += 2.0 * (w[j] * yj[k] - m[k]);
        }
      }
      break;
    }

    case OpTag::kGatherRows: {
      Node& x = input(0);
      for (std::size_t r = 0; r < n.indices.size(); ++r) {
        auto src = g.row(r);
        auto dst = x.grad.row(n.indices[r]);
        for (std::size_t k = 0; k < src.size(); ++k) dst[k] += src[k];
      }
      break;
    }

    case OpTag::kSoftmaxCrossEntropy: {
      Node& logits = input(0);
      const std::size_t rows = logits.value.rows(), cols = logits.value.cols();
      const double upstream = g.values()[0] / static_cast<double>(rows);
      for (std::size_t i = 0; i < rows; ++i) {
        auto p = n.aux.row(i);
        auto gl = logits.grad.row(i);
        for (std::size_t j = 0; j < cols; ++j) {
          const double target = j == n.indices[i] ? 1.0 : 0.0;
          gl[j] += upstream * (p[j] - target);
        }
      }
      break;
    }

    case OpTag::kSoftenedKl: {
      // aux holds [teacher probs ; student probs] stacked row-wise.
      Node& logits = input(0);
      const std::size_t rows = logits.value.rows(), cols = logits.value.cols();
      const double upstream = g.values()[0] / (static_cast<double>(rows) * n.scalar);
      for (std::size_t i = 0; i < rows; ++i) {
        auto pt = n.aux.row(i);
        auto ps = n.aux.row(rows + i);
        auto gl = logits.grad.row(i);
        for (std::size_t j = 0; j < cols; ++j) gl[j] += upstream * (ps[j] - pt[j]);
      }
      break;
    }
  }
}

namespace {

// Row-wise softmax of logits / temperature, stabilised by the row max.
// Also returns each row's log-sum-exp of the scaled logits.
Tensor row_softmax(const Tensor& logits, double temperature, std::vector<double>* log_norm) {
  const std::size_t rows = logits.rows(), cols = logits.cols();
  Tensor p(rows, cols);
  if (log_norm) log_norm->assign(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    auto z = logits.row(i);
    double mx = -INFINITY;
    for (double v : z) mx = std::max(mx, v / temperature);
    double s = 0.0;
    auto pi = p.row(i);
    for (std::size_t j = 0; j < cols; ++j) {
      pi[j] = std::exp(z[j] / temperature - mx);
      s += pi[j];
    }
    for (double& v : pi) v /= s;
    if (log_norm) (*log_norm)[i] = mx + std::log(s);
  }
  return p;
}

Tensor elementwise(const Tensor& a, const Tensor& b, double sign) {
  if (!a.same_shape(b)) throw ShapeError("elementwise operation on tensors of different shapes");
  Tensor out = a;
  auto o = out.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += sign * bv[i];
  return out;
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = GraphAccess::owner(a, b);
  return GraphAccess::push(g, OpTag::kMatMul, matmul(a.value(), b.value()), {a, b});
}

Var add_row_bias(Var a, Var bias) {
  Graph& g = GraphAccess::owner(a, bias);
  return GraphAccess::push(g, OpTag::kAddRowBias, add_row(a.value(), bias.value()), {a, bias});
}

Var add(Var a, Var b) {
  Graph& g = GraphAccess::owner(a, b);
  return GraphAccess::push(g, OpTag::kAdd, elementwise(a.value(), b.value(), 1.0), {a, b});
}

Var sub(Var a, Var b) {
  Graph& g = GraphAccess::owner(a, b);
  return GraphAccess::push(g, OpTag::kSub, elementwise(a.value(), b.value(), -1.0), {a, b});
}

Var scale(Var a, double factor) {
  Graph& g = GraphAccess::owner(a);
  Tensor v = a.value();
  for (double& x : v.values()) x *= factor;
  auto n = GraphAccess::make(g, OpTag::kScale, std::move(v), {a});
  n.scalar = factor;
  return GraphAccess::push(g, std::move(n));
}

Var relu(Var a) {
  Graph& g = GraphAccess::owner(a);
  return GraphAccess::push(g, OpTag::kRelu, relu(a.value()), {a});
}

Var exp(Var a) {
  Graph& g = GraphAccess::owner(a);
  Tensor v = a.value();
  for (double& x : v.values()) x = std::exp(x);
  return GraphAccess::push(g, OpTag::kExp, std::move(v), {a});
}

Var sum(Var a) {
  Graph& g = GraphAccess::owner(a);
  return GraphAccess::push(g, OpTag::kSum, Tensor::scalar(sum(a.value())), {a});
}

Var mean(Var a) {
  Graph& g = GraphAccess::owner(a);
  return GraphAccess::push(g, OpTag::kMean, Tensor::scalar(mean(a.value())), {a});
}

Var sum_squares(Var a) {
  Graph& g = GraphAccess::owner(a);
  double s = 0.0;
  for (double v : a.value().values()) s += v * v;
  return GraphAccess::push(g, OpTag::kSumSquares, Tensor::scalar(s), {a});
}

Var pairwise_sqdist(Var x, Var y) {
  Graph& g = GraphAccess::owner(x, y);
  return GraphAccess::push(g, OpTag::kPairwiseSqDist, pairwise_sqdist(x.value(), y.value()),
                           {x, y});
}

Var gather_rows(Var x, std::span<const std::size_t> indices) {
  Graph& g = GraphAccess::owner(x);
  auto n = GraphAccess::make(g, OpTag::kGatherRows, gather_rows(x.value(), indices), {x});
  n.indices.assign(indices.begin(), indices.end());
  return GraphAccess::push(g, std::move(n));
}

Var softmax_cross_entropy(Var logits, std::span<const int> labels) {
  Graph& g = GraphAccess::owner(logits);
  const Tensor& z = logits.value();
  if (z.rank() != 2) throw ShapeError("softmax_cross_entropy: logits must be a matrix");
  const std::size_t rows = z.rows(), cols = z.cols();
  if (rows == 0) throw DomainError("softmax_cross_entropy: empty batch");
  if (labels.size() != rows) throw ShapeError("softmax_cross_entropy: label count differs from rows");

  std::vector<std::size_t> idx(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= cols) {
      throw DomainError("softmax_cross_entropy: label " + std::to_string(labels[i]) +
                        " outside [0, " + std::to_string(cols) + ")");
    }
    idx[i] = static_cast<std::size_t>(labels[i]);
  }

  std::vector<double> log_norm;
  Tensor probs = row_softmax(z, 1.0, &log_norm);
  double loss = 0.0;
  for (std::size_t i = 0; i < rows; ++i) loss += log_norm[i] - z(i, idx[i]);
  loss /= static_cast<double>(rows);

  auto n = GraphAccess::make(g, OpTag::kSoftmaxCrossEntropy, Tensor::scalar(loss), {logits});
  n.indices = std::move(idx);
  n.aux = std::move(probs);
  return GraphAccess::push(g, std::move(n));
}

Var softened_kl(Var student_logits, const Tensor& teacher_logits, double temperature) {
  Graph& g = GraphAccess::owner(student_logits);
  const Tensor& s = student_logits.value();
  if (!s.same_shape(teacher_logits) || s.rank() != 2) {
    throw ShapeError("softened_kl: student and teacher logits differ in shape");
  }
  if (!(temperature > 0.0)) throw ParameterError("softened_kl: temperature must be positive");
  const std::size_t rows = s.rows(), cols = s.cols();
  if (rows == 0) throw DomainError("softened_kl: empty batch");

  std::vector<double> log_norm_t, log_norm_s;
  Tensor pt = row_softmax(teacher_logits, temperature, &log_norm_t);
  Tensor ps = row_softmax(s, temperature, &log_norm_s);
  double kl = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double p = pt(i, j);
      if (p == 0.0) continue;
      const double log_pt = teacher_logits(i, j) / temperature - log_norm_t[i];
      const double log_ps = s(i, j) / temperature - log_norm_s[i];
      kl += p * (log_pt - log_ps);
    }
  }
  kl /= static_cast<double>(rows);

  auto n = GraphAccess::make(g, OpTag::kSoftenedKl, Tensor::scalar(kl), {student_logits});
  n.scalar = temperature;
  n.aux = concat_rows(pt, ps);
  return GraphAccess::push(g, std::move(n));
}

}  // namespace mfd
