#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ewclab {

// Row-major dense matrix of doubles. The numeric container for inputs,
// weights, activations and gradients.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// a * b
Matrix matmul(const Matrix& a, const Matrix& b);
// transpose(a) * b
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
// a * transpose(b)
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

// Copies the given rows of `source`, in order, into a new matrix.
Matrix gather_rows(const Matrix& source, std::span<const std::size_t> rows);
// Copies rows [first, first + count).
Matrix slice_rows(const Matrix& source, std::size_t first, std::size_t count);

bool all_finite(std::span<const double> values) noexcept;

}  // namespace ewclab
