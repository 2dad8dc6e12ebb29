#include "fcoh/matrix.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "fcoh/errors.hpp"

namespace fcoh {

namespace {

std::string shape_str(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

[[noreturn]] void throw_shape_mismatch(const char* op, const Matrix& a,
                                       const Matrix& b) {
  std::ostringstream os;
  os << op << ": dimension mismatch, got " << shape_str(a) << " and "
     << shape_str(b);
  throw UsageError(os.str());
}

void require_finite(const char* op, const Matrix& m) {
  if (!m.all_finite()) {
    throw NumericError(std::string(op) + ": non-finite result");
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw UsageError("Matrix: data length does not match shape");
  }
}

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw_shape_mismatch("matmul", a, b);
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = arow[k];
      const double* brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) {
        orow[j] += aik * brow[j];
      }
    }
  }
  require_finite("matmul", out);
  return out;
}

Matrix transpose_matmul(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw_shape_mismatch("transpose_matmul", a, b);
  Matrix out(a.cols(), b.cols());
  // Same k-outer accumulation order as matmul so the result is bitwise equal
  // to matmul(transpose(a), b).
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* arow = a.row(k);
    const double* brow = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = arow[i];
      double* orow = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) {
        orow[j] += aki * brow[j];
      }
    }
  }
  require_finite("transpose_matmul", out);
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      out(j, i) = a(i, j);
    }
  }
  return out;
}

Matrix sgn(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) {
    out.data()[i] = m.data()[i] >= 0.0 ? 1.0 : -1.0;
  }
  return out;
}

Matrix sigma(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double x = m.data()[i];
    const bool positive = x > 1.0 || (x > -1.0 && x < 0.0);
    out.data()[i] = positive ? 1.0 : -1.0;
  }
  return out;
}

Matrix add_scalar(const Matrix& m, double s) {
  Matrix out = m;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += s;
  return out;
}

void axpy(Matrix& y, double alpha, const Matrix& x) {
  if (y.rows() != x.rows() || y.cols() != x.cols()) {
    throw_shape_mismatch("axpy", y, x);
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    y.data()[i] += alpha * x.data()[i];
  }
}

Matrix scaled(const Matrix& m, double s) {
  Matrix out = m;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= s;
  return out;
}

}  // namespace fcoh
