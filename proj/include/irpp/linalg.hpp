#pragma once
// Small dense linear algebra on top of the kernels: a row-major matrix type,
// matrix products, norms, and an LU solve with partial pivoting. Problem
// sizes in this project are at most a few hundred, so everything is dense.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace irpp {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }
  std::span<double> row_span(std::size_t i) { return {row(i), cols_}; }
  std::span<const double> row_span(std::size_t i) const { return {row(i), cols_}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  static Matrix identity(std::size_t n);

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

// out = A * B, with A m x k and B k x n (row-major accumulation via axpy).
Matrix matmul(const Matrix& a, const Matrix& b);
// y = A * x
Vector matvec(const Matrix& a, std::span<const double> x);
// y = A^T * x
Vector matvec_transposed(const Matrix& a, std::span<const double> x);
Matrix transpose(const Matrix& a);

double norm2(std::span<const double> x);
// Frobenius norm (the entrywise 2-norm used for stacked iterate matrices).
double frobenius_norm(const Matrix& a);
// Spectral norm via power iteration on A^T A.
double spectral_norm(const Matrix& a, int max_iters = 10000, double tol = 1e-12);

// Solves A x = b by LU with partial pivoting. Throws on singular A.
Vector lu_solve(Matrix a, Vector b);

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

// Dense CSV export, row-major, one row per line, shortest round-trip decimals.
void write_matrix_csv(const Matrix& a, const std::string& path);
// Loads a CSV with a header row (header contents are ignored).
Matrix read_matrix_csv(const std::string& path);

}  // namespace irpp
