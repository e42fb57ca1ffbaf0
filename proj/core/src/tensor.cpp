#include "mfd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "mfd/errors.hpp"

namespace mfd {
namespace {

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

void require_matrix(const Tensor& t, const char* what) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(what) + ": expected a matrix, got shape " + shape_str(t.shape()));
  }
}

}  // namespace

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : shape_{rows, cols}, data_(rows * cols, fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  const std::size_t expected =
      std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
  if (expected != data_.size()) {
    throw ShapeError("tensor shape " + shape_str(shape_) + " does not match " +
                     std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::scalar(double value) { return Tensor(1, 1, value); }

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n = rows.size();
  const std::size_t m = n == 0 ? 0 : rows.begin()->size();
  Tensor t(n, m);
  std::size_t r = 0;
  for (const auto& row : rows) {
    if (row.size() != m) throw ShapeError("from_rows: ragged rows");
    std::copy(row.begin(), row.end(), t.data_.begin() + static_cast<std::ptrdiff_t>(r * m));
    ++r;
  }
  return t;
}

Tensor Tensor::zeros_like(const Tensor& other) {
  return Tensor(other.shape_, std::vector<double>(other.size(), 0.0));
}

std::size_t Tensor::rows() const {
  require_matrix(*this, "rows");
  return shape_[0];
}

std::size_t Tensor::cols() const {
  require_matrix(*this, "cols");
  return shape_[1];
}

std::span<const double> Tensor::row(std::size_t r) const {
  const std::size_t c = cols();
  return std::span<const double>(data_).subspan(r * c, c);
}

std::span<double> Tensor::row(std::size_t r) {
  const std::size_t c = cols();
  return std::span<double>(data_).subspan(r * c, c);
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw ShapeError("item: tensor of shape " + shape_str(shape_) + " is not a scalar");
  }
  return data_[0];
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  const std::size_t r = a.rows(), c = a.cols();
  Tensor out(c, r);
  const double* pa = a.values().data();
  double* po = out.values().data();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) po[j * r + i] = pa[i * c + j];
  }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  if (b.rows() != k) throw ShapeError("matmul: inner dimensions differ");
  Tensor out(n, m);
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  double* po = out.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = po + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      const double* brow = pb + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_tn");
  require_matrix(b, "matmul_tn");
  const std::size_t k = a.rows(), n = a.cols(), m = b.cols();
  if (b.rows() != k) throw ShapeError("matmul_tn: inner dimensions differ");
  Tensor out(n, m);
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  double* po = out.values().data();
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = pa + p * n;
    const double* brow = pb + p * m;
    for (std::size_t i = 0; i < n; ++i) {
      const double av = arow[i];
      double* orow = po + i * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_nt");
  require_matrix(b, "matmul_nt");
  if (b.cols() != a.cols()) throw ShapeError("matmul_nt: inner dimensions differ");
  return matmul(a, transpose(b));
}

Tensor add_row(const Tensor& a, const Tensor& bias) {
  require_matrix(a, "add_row");
  if (bias.size() != a.cols()) throw ShapeError("add_row: bias width differs from matrix width");
  Tensor out = a;
  const std::size_t m = a.cols();
  auto v = out.values();
  auto b = bias.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < m; ++j) v[i * m + j] += b[j];
  }
  return out;
}

Tensor relu(const Tensor& a) {
  Tensor out = a;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

Tensor pairwise_sqdist(const Tensor& x, const Tensor& y) {
  require_matrix(x, "pairwise_sqdist");
  require_matrix(y, "pairwise_sqdist");
  if (x.cols() != y.cols()) {
    throw ShapeError("pairwise_sqdist: feature dimensions differ (" + std::to_string(x.cols()) +
                     " vs " + std::to_string(y.cols()) + ")");
  }
  const std::size_t n = x.rows(), m = y.rows(), d = x.cols();
  Tensor out(n, m);
  // y transposed so the inner loop runs over contiguous output entries; each
  // entry still sums its d terms in index order
  const Tensor yt = transpose(y);
  const double* px = x.values().data();
  const double* pyt = yt.values().data();
  double* po = out.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = po + i * m;
    for (std::size_t k = 0; k < d; ++k) {
      const double xv = px[i * d + k];
      const double* ycol = pyt + k * m;
      for (std::size_t j = 0; j < m; ++j) {
        const double diff = xv - ycol[j];
        orow[j] += diff * diff;
      }
    }
  }
  return out;
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices) {
  require_matrix(x, "gather_rows");
  const std::size_t d = x.cols();
  Tensor out(indices.size(), d);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= x.rows()) throw ShapeError("gather_rows: row index out of range");
    auto src = x.row(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

Tensor concat_rows(const Tensor& top, const Tensor& bottom) {
  require_matrix(top, "concat_rows");
  require_matrix(bottom, "concat_rows");
  if (top.cols() != bottom.cols()) throw ShapeError("concat_rows: widths differ");
  std::vector<double> v(top.values().begin(), top.values().end());
  v.insert(v.end(), bottom.values().begin(), bottom.values().end());
  return Tensor({top.rows() + bottom.rows(), top.cols()}, std::move(v));
}

double sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return s;
}

double mean(const Tensor& a) {
  if (a.empty()) throw DomainError("mean of an empty tensor");
  return sum(a) / static_cast<double>(a.size());
}

}  // namespace mfd
