#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace pwl {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);

/// Dense row-major array of doubles. Rank 1 tensors ([n]) hold vectors such
/// as the universal weight; rank 2 tensors ([rows x cols]) hold batches and
/// weight matrices; shape [1] is a scalar.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value) { return Tensor({1}, {value}); }
  static Tensor vector(std::initializer_list<double> values);
  static Tensor vector(std::vector<double> values);
  /// Nested initializer: Tensor::matrix({{1, 2}, {3, 4}}).
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor zeros(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }
  static Tensor ones(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}, 1.0); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  /// Rows of a rank 2 tensor; 1 for rank 1.
  std::size_t rows() const;
  /// Columns of a rank 2 tensor; length for rank 1.
  std::size_t cols() const;

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t row, std::size_t col) { return data_[row * cols() + col]; }
  double at(std::size_t row, std::size_t col) const { return data_[row * cols() + col]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols(), cols()}; }

  /// Scalar value of a one-element tensor.
  double item() const;

  /// Copy of rows [begin, begin + count).
  Tensor slice_rows(std::size_t begin, std::size_t count) const;
  /// Rows gathered by index, in the given order.
  Tensor gather_rows(std::span<const std::size_t> indices) const;

  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Largest elementwise |a - b|; shapes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace pwl
