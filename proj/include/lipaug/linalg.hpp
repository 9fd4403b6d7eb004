/* Copyright 2026 The lipaug Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Minimal dense linear algebra over 64-bit floats, plus the scalar
// primitives used by the augmented loss: the softened indicator, the
// (p, q) entrywise matrix norm and the indicator-stacking function.

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace lipaug {

class DenseVector {
 public:
  DenseVector() = default;
  // Throws NonFiniteError if any entry is NaN or infinite.
  explicit DenseVector(std::vector<double> entries);
  DenseVector(std::initializer_list<double> entries);

  static DenseVector zeros(std::size_t dim);
  static DenseVector basis(std::size_t dim, std::size_t k);

  std::size_t size() const { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }
  std::span<const double> entries() const { return entries_; }
  const std::vector<double>& vec() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  double norm() const;
  double squared_norm() const;
  double dot(const DenseVector& other) const;

  friend bool operator==(const DenseVector&, const DenseVector&) = default;

 private:
  std::vector<double> entries_;
};

DenseVector operator+(const DenseVector& a, const DenseVector& b);
DenseVector operator-(const DenseVector& a, const DenseVector& b);
DenseVector operator*(double s, const DenseVector& a);
// Entrywise product.
DenseVector hadamard(const DenseVector& a, const DenseVector& b);

// Row-major dense matrix. Immutable after construction.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  // Throws ShapeError if entries.size() != rows * cols and NonFiniteError on
  // NaN/Inf entries.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static DenseMatrix zeros(std::size_t rows, std::size_t cols);
  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(const DenseVector& d);
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
  std::span<const double> entries() const { return entries_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(entries_).subspan(i * cols_, cols_);
  }
  DenseVector column(std::size_t j) const;

  DenseMatrix transpose() const;
  double frobenius_norm() const;
  double max_abs() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseVector operator*(const DenseMatrix& a, const DenseVector& x);
DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double s, const DenseMatrix& a);
// diag(d) * a without materializing the diagonal matrix.
DenseMatrix scale_rows(const DenseVector& d, const DenseMatrix& a);
// a^T x
DenseVector transpose_times(const DenseMatrix& a, const DenseVector& x);
// u v^T
DenseMatrix outer(const DenseVector& u, const DenseVector& v);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

// Softened indicator 1[<= kappa](t): 1 on [0, kappa], 2 - t/kappa on
// [kappa, 2 kappa], 0 beyond. kappa = +inf is admitted and yields 1.
// Throws DomainError if kappa <= 0 or t < 0.
double soft_indicator(double t, double kappa);

// (sum_j (sum_i |A_ij|^p)^(q/p))^(1/q): column-inner, row-outer.
double norm_pq(const DenseMatrix& a, double p, double q);

struct SpectralNormOptions {
  double relative_tolerance = 1e-10;
  int max_iterations = 10000;
  std::uint64_t seed = 0x5eedULL;
};

// Largest singular value by power iteration on the smaller Gram matrix,
// squaring the iterated operator each step and stopping on a certified
// lower/upper bracket. Diagonal matrices are answered exactly.
// Throws ConvergenceError (carrying the last estimate) past max_iterations.
double spectral_norm(const DenseMatrix& a, const SpectralNormOptions& options = {});

// u(x1, x2) = (x1 - 1) x2 + 1 on [0,1]^2. Throws DomainError outside.
double stack_upper(double x1, double x2);

}  // namespace lipaug
