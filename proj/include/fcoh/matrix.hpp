#pragma once

#include <cstddef>
#include <vector>

namespace fcoh {

// Dense real matrix, double precision, row-major. Small by design: it carries
// exactly the operations the online learner needs and nothing else.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }

  const double* data() const { return data_.data(); }
  double* data() { return data_.data(); }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }
  double* row(std::size_t i) { return data_.data() + i * cols_; }

  bool all_finite() const;
  double frobenius_norm() const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// a (m x k) times b (k x n). Throws UsageError on shape mismatch and
// NumericError if the product is not finite.
Matrix matmul(const Matrix& a, const Matrix& b);

// a^T b without materializing a^T; a (k x m), b (k x n) -> (m x n).
// Bitwise equal to matmul(transpose(a), b).
Matrix transpose_matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

// Entrywise sign into {-1, +1}; zero maps to +1 so equal inputs always get
// equal codes.
Matrix sgn(const Matrix& m);

// Entrywise subgradient of | |x| - 1 |: +1 on (-1,0) and (1,inf), -1
// elsewhere; the kinks at -1, 0, 1 take the -1 branch.
Matrix sigma(const Matrix& m);

// Entrywise m + s.
Matrix add_scalar(const Matrix& m, double s);

// y += alpha * x; shapes must match.
void axpy(Matrix& y, double alpha, const Matrix& x);

Matrix scaled(const Matrix& m, double s);

}  // namespace fcoh
