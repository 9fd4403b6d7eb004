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

#include "lipaug/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "lipaug/errors.hpp"
#include "lipaug/random.hpp"

namespace lipaug {
namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NonFiniteError(std::string(what) + ": non-finite entry");
    }
  }
}

void require_same_size(const DenseVector& a, const DenseVector& b, const char* op) {
  if (a.size() != b.size()) {
    std::ostringstream msg;
    msg << op << ": dimension mismatch " << a.size() << " vs " << b.size();
    throw ShapeError(msg.str());
  }
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << op << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows()
        << "x" << b.cols();
    throw ShapeError(msg.str());
  }
}

double euclidean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseVector

DenseVector::DenseVector(std::vector<double> entries) : entries_(std::move(entries)) {
  require_finite(entries_, "DenseVector");
}

DenseVector::DenseVector(std::initializer_list<double> entries)
    : DenseVector(std::vector<double>(entries)) {}

DenseVector DenseVector::zeros(std::size_t dim) { return DenseVector(std::vector<double>(dim, 0.0)); }

DenseVector DenseVector::basis(std::size_t dim, std::size_t k) {
  if (k >= dim) throw ShapeError("DenseVector::basis: index out of range");
  std::vector<double> e(dim, 0.0);
  e[k] = 1.0;
  return DenseVector(std::move(e));
}

double DenseVector::norm() const { return euclidean(entries_); }

double DenseVector::squared_norm() const {
  double s = 0.0;
  for (double x : entries_) s += x * x;
  return s;
}

double DenseVector::dot(const DenseVector& other) const {
  require_same_size(*this, other, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < entries_.size(); ++i) s += entries_[i] * other.entries_[i];
  return s;
}

DenseVector operator+(const DenseVector& a, const DenseVector& b) {
  require_same_size(a, b, "vector +");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return DenseVector(std::move(out));
}

DenseVector operator-(const DenseVector& a, const DenseVector& b) {
  require_same_size(a, b, "vector -");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return DenseVector(std::move(out));
}

DenseVector operator*(double s, const DenseVector& a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return DenseVector(std::move(out));
}

DenseVector hadamard(const DenseVector& a, const DenseVector& b) {
  require_same_size(a, b, "hadamard");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return DenseVector(std::move(out));
}

// ---------------------------------------------------------------------------
// DenseMatrix

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    std::ostringstream msg;
    msg << "DenseMatrix: " << entries_.size() << " entries for shape " << rows_ << "x" << cols_;
    throw ShapeError(msg.str());
  }
  require_finite(entries_, "DenseMatrix");
}

DenseMatrix DenseMatrix::zeros(std::size_t rows, std::size_t cols) {
  return DenseMatrix(rows, cols, std::vector<double>(rows * cols, 0.0));
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  std::vector<double> e(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
  return DenseMatrix(n, n, std::move(e));
}

DenseMatrix DenseMatrix::diagonal(const DenseVector& d) {
  const std::size_t n = d.size();
  std::vector<double> e(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) e[i * n + i] = d[i];
  return DenseMatrix(n, n, std::move(e));
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<std::vector<double>> copy;
  for (const auto& r : rows) copy.emplace_back(r);
  return from_rows(copy);
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.front().size();
  std::vector<double> e;
  e.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("DenseMatrix::from_rows: ragged rows");
    e.insert(e.end(), row.begin(), row.end());
  }
  return DenseMatrix(r, c, std::move(e));
}

DenseVector DenseMatrix::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return DenseVector(std::move(out));
}

DenseMatrix DenseMatrix::transpose() const {
  std::vector<double> out(entries_.size());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out[j * rows_ + i] = entries_[i * cols_ + j];
  return DenseMatrix(cols_, rows_, std::move(out));
}

double DenseMatrix::frobenius_norm() const { return euclidean(entries_); }

double DenseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : entries_) m = std::max(m, std::abs(v));
  return m;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream msg;
    msg << "matmul: " << a.rows() << "x" << a.cols() << " times " << b.rows() << "x" << b.cols();
    throw ShapeError(msg.str());
  }
  const std::size_t n = a.rows(), m = b.cols(), k = a.cols();
  std::vector<double> out(n * m, 0.0);
  const auto ae = a.entries();
  const auto be = b.entries();
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = out.data() + i * m;
    for (std::size_t l = 0; l < k; ++l) {
      const double ail = ae[i * k + l];
      const double* brow = be.data() + l * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += ail * brow[j];
    }
  }
  return DenseMatrix(n, m, std::move(out));
}

DenseVector operator*(const DenseMatrix& a, const DenseVector& x) {
  if (a.cols() != x.size()) {
    std::ostringstream msg;
    msg << "matvec: " << a.rows() << "x" << a.cols() << " times vector of dim " << x.size();
    throw ShapeError(msg.str());
  }
  std::vector<double> out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * x[j];
    out[i] = s;
  }
  return DenseVector(std::move(out));
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "matrix +");
  std::vector<double> out(a.entries().begin(), a.entries().end());
  const auto be = b.entries();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += be[i];
  return DenseMatrix(a.rows(), a.cols(), std::move(out));
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "matrix -");
  std::vector<double> out(a.entries().begin(), a.entries().end());
  const auto be = b.entries();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= be[i];
  return DenseMatrix(a.rows(), a.cols(), std::move(out));
}

DenseMatrix operator*(double s, const DenseMatrix& a) {
  std::vector<double> out(a.entries().begin(), a.entries().end());
  for (auto& v : out) v *= s;
  return DenseMatrix(a.rows(), a.cols(), std::move(out));
}

DenseMatrix scale_rows(const DenseVector& d, const DenseMatrix& a) {
  if (d.size() != a.rows()) throw ShapeError("scale_rows: dimension mismatch");
  std::vector<double> out(a.entries().begin(), a.entries().end());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i * a.cols() + j] *= d[i];
  return DenseMatrix(a.rows(), a.cols(), std::move(out));
}

DenseVector transpose_times(const DenseMatrix& a, const DenseVector& x) {
  if (a.rows() != x.size()) throw ShapeError("transpose_times: dimension mismatch");
  std::vector<double> out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    const double xi = x[i];
    for (std::size_t j = 0; j < r.size(); ++j) out[j] += r[j] * xi;
  }
  return DenseVector(std::move(out));
}

DenseMatrix outer(const DenseVector& u, const DenseVector& v) {
  std::vector<double> out(u.size() * v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out[i * v.size() + j] = u[i] * v[j];
  return DenseMatrix(u.size(), v.size(), std::move(out));
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  const auto ae = a.entries();
  const auto be = b.entries();
  for (std::size_t i = 0; i < ae.size(); ++i) m = std::max(m, std::abs(ae[i] - be[i]));
  return m;
}

// ---------------------------------------------------------------------------
// Scalar primitives and norms

double soft_indicator(double t, double kappa) {
  if (!(kappa > 0.0)) throw DomainError("soft_indicator: kappa must be positive");
  if (!(t >= 0.0)) throw DomainError("soft_indicator: t must be nonnegative");
  if (std::isinf(kappa)) return 1.0;
  if (t <= kappa) return 1.0;
  if (t >= 2.0 * kappa) return 0.0;
  return 2.0 - t / kappa;
}

double norm_pq(const DenseMatrix& a, double p, double q) {
  if (!(p > 0.0) || !(q > 0.0)) throw DomainError("norm_pq: p and q must be positive");
  double outer_sum = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double inner = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) inner += std::pow(std::abs(a(i, j)), p);
    outer_sum += std::pow(inner, q / p);
  }
  return std::pow(outer_sum, 1.0 / q);
}

double spectral_norm(const DenseMatrix& a, const SpectralNormOptions& options) {
  if (a.rows() == 0 || a.cols() == 0) throw ShapeError("spectral_norm: empty matrix");
  if (a.max_abs() == 0.0) return 0.0;
  if (a.rows() == a.cols()) {
    // Diagonal matrices (activation Jacobians) have the exact answer.
    bool diagonal = true;
    double big = 0.0;
    for (std::size_t i = 0; i < a.rows() && diagonal; ++i) {
      for (std::size_t j = 0; j < a.cols(); ++j) {
        if (i != j && a(i, j) != 0.0) {
          diagonal = false;
          break;
        }
      }
      big = std::max(big, std::abs(a(i, i)));
    }
    if (diagonal) return big;
  }

  // Gram matrix on the smaller side: A^T A (cols) or A A^T (rows), of A
  // divided by its largest entry so huge or tiny matrices do not overflow.
  const double unit = a.max_abs();
  const bool on_columns = a.cols() <= a.rows();
  const std::size_t n = on_columns ? a.cols() : a.rows();
  const std::size_t m = on_columns ? a.rows() : a.cols();
  const auto e = a.entries();
  const std::size_t stride = a.cols();
  auto at = [&](std::size_t k, std::size_t i) {
    return (on_columns ? e[k * stride + i] : e[i * stride + k]) / unit;
  };
  std::vector<double> g(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += at(k, i) * at(k, j);
      g[i * n + j] = s;
      g[j * n + i] = s;
    }
  }

  // Power iteration where the iterated operator is squared after every step:
  // P_k = G^(2^k) / C_k. The Rayleigh quotient of the iterate is a lower
  // bound on sigma_max^2 and trace(P_k) C_k is an upper bound on
  // sigma_max^(2^(k+1)), so the loop stops on a certified bracket. Nearly
  // tied top singular values (activation Jacobians) are handled without
  // stalling.
  auto rescale = [](std::vector<double>& p) {
    double big = 0.0;
    for (double x : p) big = std::max(big, std::abs(x));
    if (big > 0.0)
      for (auto& x : p) x /= big;
    return big;
  };
  auto normalize = [](std::vector<double>& v) {
    const double nv = euclidean(v);
    if (nv > 0.0)
      for (auto& x : v) x /= nv;
    return nv;
  };
  // sqrt(v^T G v) for unit v.
  auto rayleigh = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += g[i * n + j] * v[j];
      s += v[i] * row;
    }
    return std::sqrt(std::max(s, 0.0));
  };

  std::vector<double> p = g;
  double log_scale = std::log(rescale(p));
  double power = 1.0;  // 2^k
  std::vector<double> sq(n * n), v(n), w(n);
  Rng rng(options.seed);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  normalize(v);

  double estimate = rayleigh(v);
  for (int it = 0; it < options.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += p[i * n + j] * v[j];
      w[i] = s;
    }
    if (normalize(w) == 0.0) {
      // Start vector in the null space; restart from a coordinate direction.
      std::fill(v.begin(), v.end(), 0.0);
      v[static_cast<std::size_t>(it) % n] = 1.0;
    } else {
      v.swap(w);
    }
    estimate = std::max(estimate, rayleigh(v));
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += p[i * n + i];
    const double upper = std::exp(0.5 * (std::log(trace) + log_scale) / power);
    if (upper - estimate <= options.relative_tolerance * estimate) return estimate * unit;

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += p[i * n + k] * p[k * n + j];
        sq[i * n + j] = s;
      }
    }
    p.swap(sq);
    log_scale = 2.0 * log_scale + std::log(rescale(p));
    power *= 2.0;
  }
  throw ConvergenceError("spectral_norm: power iteration did not converge", estimate * unit);
}

double stack_upper(double x1, double x2) {
  if (!(x1 >= 0.0 && x1 <= 1.0) || !(x2 >= 0.0 && x2 <= 1.0)) {
    throw DomainError("stack_upper: arguments must lie in [0, 1]");
  }
  return (x1 - 1.0) * x2 + 1.0;
}

}  // namespace lipaug
