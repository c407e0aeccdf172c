#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace cccpde {

/// Dense row-major matrix of doubles. Row vectors are 1xD, batches are NxD.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);
  static Matrix row_vector(std::span<const double> values);
  static Matrix column_vector(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double v);
  bool all_finite() const;
  Matrix transposed() const;
  std::string shape_string() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);

/// Elementwise product.
Matrix hadamard(const Matrix& a, const Matrix& b);

/// Matrix product, row-parallel under OpenMP for large operands. Each output
/// entry is accumulated in the same k order as matmul_reference, so the two
/// agree bit-for-bit regardless of thread count.
Matrix matmul(const Matrix& a, const Matrix& b);

/// Serial i-k-j product used as the reference for matmul.
Matrix matmul_reference(const Matrix& a, const Matrix& b);

/// a^T * b without materializing the transpose.
Matrix matmul_at_b(const Matrix& a, const Matrix& b);

/// a * b^T without materializing the transpose.
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

/// Adds the 1xC row vector `bias` to every row of `m`.
void add_row_broadcast(Matrix& m, const Matrix& bias);

/// Column sums as a 1xC row vector.
Matrix column_sums(const Matrix& m);

Matrix select_rows(const Matrix& m, std::span<const std::size_t> indices);
Matrix slice_cols(const Matrix& m, std::size_t begin, std::size_t end);

/// Concatenates columns of `left` and `right` (equal row counts).
Matrix hconcat(const Matrix& left, const Matrix& right);

double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace cccpde
