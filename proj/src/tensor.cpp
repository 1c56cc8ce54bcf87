#include "pwl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "pwl/error.hpp"

namespace pwl {
namespace {

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void check_shape(const Shape& shape) {
  if (shape.empty() || shape.size() > 2) {
    throw DimensionError("tensor rank must be 1 or 2, got shape " + shape_to_string(shape));
  }
  for (std::size_t d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_to_string(shape));
  }
}

}  // namespace

std::string shape_to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(element_count(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  check_shape(shape_);
  if (element_count(shape_) != data_.size()) {
    throw DimensionError("shape " + shape_to_string(shape_) + " needs " +
                         std::to_string(element_count(shape_)) + " values, got " +
                         std::to_string(data_.size()));
  }
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n_rows = rows.size();
  const std::size_t n_cols = n_rows ? rows.begin()->size() : 0;
  std::vector<double> values;
  values.reserve(n_rows * n_cols);
  for (const auto& r : rows) {
    if (r.size() != n_cols) throw DimensionError("ragged matrix initializer");
    values.insert(values.end(), r.begin(), r.end());
  }
  return Tensor({n_rows, n_cols}, std::move(values));
}

std::size_t Tensor::rows() const { return shape_.size() == 2 ? shape_[0] : 1; }

std::size_t Tensor::cols() const { return shape_.empty() ? 0 : shape_.back(); }

double Tensor::item() const {
  if (data_.size() != 1) {
    throw DimensionError("item() needs a one-element tensor, got " + shape_to_string(shape_));
  }
  return data_[0];
}

Tensor Tensor::slice_rows(std::size_t begin, std::size_t count) const {
  if (rank() != 2 || begin + count > rows() || count == 0) {
    throw DimensionError("cannot slice rows [" + std::to_string(begin) + ", +" + std::to_string(count) +
                         ") of " + shape_to_string(shape_));
  }
  const auto first = data_.begin() + static_cast<std::ptrdiff_t>(begin * cols());
  return Tensor({count, cols()}, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(count * cols())));
}

Tensor Tensor::gather_rows(std::span<const std::size_t> indices) const {
  if (rank() != 2 || indices.empty()) {
    throw DimensionError("gather_rows needs a matrix and at least one index");
  }
  const std::size_t c = cols();
  std::vector<double> values;
  values.reserve(indices.size() * c);
  for (std::size_t i : indices) {
    if (i >= rows()) throw DimensionError("row index " + std::to_string(i) + " out of range");
    const auto first = data_.begin() + static_cast<std::ptrdiff_t>(i * c);
    values.insert(values.end(), first, first + static_cast<std::ptrdiff_t>(c));
  }
  return Tensor({indices.size(), c}, std::move(values));
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("max_abs_diff shape mismatch: " + shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace pwl
