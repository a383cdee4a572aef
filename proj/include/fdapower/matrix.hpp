#pragma once

#include <cstddef>
#include <vector>

namespace fdapower {

// Dense row-major matrix of doubles. Small and unclever on purpose: every
// matrix in this library is K x K (a handful of components) or R x R
// (grid resolution, capped at 512).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Matrix transpose() const;
  Matrix operator*(const Matrix& rhs) const;
  Matrix operator+(const Matrix& rhs) const;
  Matrix operator-(const Matrix& rhs) const;
  Matrix scaled(double s) const;

  std::vector<double> multiply(const std::vector<double>& v) const;

  // Column j as a vector.
  std::vector<double> column(std::size_t j) const;

  double max_abs() const;
  double frobenius_norm() const;
  bool is_finite() const;
  // Largest |a_ij - a_ji|.
  double asymmetry() const;
  void symmetrize();

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace fdapower
