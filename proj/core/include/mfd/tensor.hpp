#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mfd {

/// Dense row-major tensor of doubles.
///
/// Most operations in this library work on rank-2 tensors (matrices); a
/// scalar is represented as a 1x1 matrix. The shape is kept general so a
/// tensor can also carry vectors or higher-rank blocks through the graph.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor scalar(double value);
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor zeros_like(const Tensor& other);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Rank-2 accessors; throw ShapeError on other ranks.
  std::size_t rows() const;
  std::size_t cols() const;

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_unchecked() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_unchecked() + c]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<const double> row(std::size_t r) const;
  std::span<double> row(std::size_t r);

  /// Value of a single-element tensor.
  double item() const;
  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  void fill(double value);

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  std::size_t cols_unchecked() const { return shape_.size() == 2 ? shape_[1] : 1; }

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// Value-level kernels. The graph operations forward to these; they are also
// used directly by inference paths that need no gradients.

/// A(n x k) * B(k x m).
Tensor matmul(const Tensor& a, const Tensor& b);
/// A^T * B for A(k x n), B(k x m).
Tensor matmul_tn(const Tensor& a, const Tensor& b);
/// A * B^T for A(n x k), B(m x k).
Tensor matmul_nt(const Tensor& a, const Tensor& b);
/// Adds the 1 x m row vector `bias` to each row of `a`.
Tensor add_row(const Tensor& a, const Tensor& bias);
Tensor relu(const Tensor& a);
/// Squared Euclidean distances between the rows of x and the rows of y.
Tensor pairwise_sqdist(const Tensor& x, const Tensor& y);
Tensor transpose(const Tensor& a);
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices);
Tensor concat_rows(const Tensor& top, const Tensor& bottom);

double sum(const Tensor& a);
double mean(const Tensor& a);

}  // namespace mfd
