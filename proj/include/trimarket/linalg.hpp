#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace trimarket {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }
  const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

/// In-place LU factorization with row partial pivoting.
/// Stores L (unit diagonal) and U packed in one dense array.
class DenseLu {
 public:
  DenseLu() = default;

  /// Factorizes a; throws std::runtime_error if singular to working precision.
  void factorize(Matrix a) {
    n_ = a.rows();
    if (a.cols() != n_) throw std::runtime_error("DenseLu: matrix not square");
    lu_ = std::move(a);
    perm_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) perm_[i] = i;
    for (std::size_t k = 0; k < n_; ++k) {
      std::size_t piv = k;
      double best = std::fabs(lu_(k, k));
      for (std::size_t i = k + 1; i < n_; ++i) {
        double v = std::fabs(lu_(i, k));
        if (v > best) {
          best = v;
          piv = i;
        }
      }
      if (best < 1e-12) throw std::runtime_error("DenseLu: singular matrix");
      if (piv != k) {
        std::swap(perm_[piv], perm_[k]);
        for (std::size_t j = 0; j < n_; ++j) std::swap(lu_(piv, j), lu_(k, j));
      }
      const double pivot = lu_(k, k);
      for (std::size_t i = k + 1; i < n_; ++i) {
        double m = lu_(i, k) / pivot;
        lu_(i, k) = m;
        if (m == 0.0) continue;
        const double* uk = lu_.row_ptr(k);
        double* ui = lu_.row_ptr(i);
        for (std::size_t j = k + 1; j < n_; ++j) ui[j] -= m * uk[j];
      }
    }
  }

  std::size_t size() const { return n_; }

  /// Solves A x = b.
  void solve(const std::vector<double>& b, std::vector<double>& x) const {
    x.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 1; i < n_; ++i) {
      const double* li = lu_.row_ptr(i);
      double s = x[i];
      for (std::size_t j = 0; j < i; ++j) s -= li[j] * x[j];
      x[i] = s;
    }
    for (std::size_t ii = n_; ii-- > 0;) {
      const double* ui = lu_.row_ptr(ii);
      double s = x[ii];
      for (std::size_t j = ii + 1; j < n_; ++j) s -= ui[j] * x[j];
      x[ii] = s / ui[ii];
    }
  }

  /// Solves A^T x = b.
  void solve_transpose(const std::vector<double>& b, std::vector<double>& x) const {
    // A^T = (P^T L U)^T = U^T L^T P
    std::vector<double> y(b);
    for (std::size_t i = 0; i < n_; ++i) {
      double s = y[i];
      for (std::size_t j = 0; j < i; ++j) s -= lu_(j, i) * y[j];
      y[i] = s / lu_(i, i);
    }
    for (std::size_t ii = n_; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t j = ii + 1; j < n_; ++j) s -= lu_(j, ii) * y[j];
      y[ii] = s;
    }
    x.assign(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) x[perm_[i]] = y[i];
  }

 private:
  std::size_t n_ = 0;
  Matrix lu_;
  std::vector<std::size_t> perm_;
};

}  // namespace trimarket
