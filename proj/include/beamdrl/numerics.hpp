// Copyright 2026 The beamdrl Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Complex linear algebra, special functions and labelled random streams.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "beamdrl/errors.hpp"

namespace beamdrl {

using Complex = std::complex<double>;

// Dense complex matrix, row-major.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  CMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
      throw ShapeError("CMatrix: entry count " + std::to_string(data_.size()) +
                       " does not match " + std::to_string(rows_) + "x" + std::to_string(cols_));
    }
  }

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static CMatrix column(std::vector<Complex> entries) {
    const std::size_t n = entries.size();
    return CMatrix(n, 1, std::move(entries));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  // Flat access; meaningful for vectors.
  Complex& operator[](std::size_t i) { return data_[i]; }
  const Complex& operator[](std::size_t i) const { return data_[i]; }

  std::span<Complex> entries() { return data_; }
  std::span<const Complex> entries() const { return data_; }

  CMatrix col(std::size_t c) const {
    CMatrix out(rows_, 1);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  CMatrix& operator*=(Complex s) {
    for (auto& v : data_) v *= s;
    return *this;
  }
  CMatrix& operator+=(const CMatrix& o) {
    if (o.rows_ != rows_ || o.cols_ != cols_) throw ShapeError("CMatrix +=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }

  bool all_finite() const {
    for (const auto& v : data_) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
    return true;
  }

  friend bool operator==(const CMatrix&, const CMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

inline CMatrix matmul(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                     std::to_string(b.rows()) + " differ");
  }
  CMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

inline CMatrix hermitian(const CMatrix& a) {
  CMatrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = std::conj(a(i, j));
  }
  return out;
}

inline double frobenius_norm_sq(const CMatrix& a) {
  double s = 0.0;
  for (const auto& v : a.entries()) s += std::norm(v);
  return s;
}

inline double frobenius_norm(const CMatrix& a) { return std::sqrt(frobenius_norm_sq(a)); }

// a^H b for two vectors of equal length (shape is not otherwise checked).
inline Complex inner(const CMatrix& a, const CMatrix& b) {
  if (a.size() != b.size()) throw ShapeError("inner: length mismatch");
  Complex s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline CMatrix normalized(CMatrix v) {
  const double n = frobenius_norm(v);
  if (n == 0.0) throw DomainError("normalized: zero vector");
  v *= 1.0 / n;
  return v;
}

namespace detail {

// Lower-triangular Cholesky factor of a Hermitian positive definite matrix.
inline CMatrix cholesky(const CMatrix& g) {
  const std::size_t n = g.rows();
  CMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = g(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw SingularityError("pseudo_inverse: Gram matrix is not positive definite");
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      Complex s = g(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }
  return l;
}

// Solves (L L^H) x = b in place for one column vector.
inline void cholesky_solve(const CMatrix& l, std::vector<Complex>& x) {
  const std::size_t n = l.rows();
  for (std::size_t i = 0; i < n; ++i) {
    Complex s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x[k];
    x[i] = s / l(i, i).real();
  }
  for (std::size_t i = n; i-- > 0;) {
    Complex s = x[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= std::conj(l(k, i)) * x[k];
    x[i] = s / l(i, i).real();
  }
}

inline std::vector<Complex> probe_vector(std::size_t n) {
  std::vector<Complex> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = Complex(1.0 + 0.37 * static_cast<double>(i), 0.5 - 0.11 * static_cast<double>(i));
  }
  return v;
}

inline double normalize_in_place(std::vector<Complex>& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  s = std::sqrt(s);
  if (s > 0.0) {
    for (auto& x : v) x /= s;
  }
  return s;
}

// Ratio of extreme eigenvalues of a Hermitian PD matrix by power and inverse iteration.
inline double gram_condition(const CMatrix& g, const CMatrix& chol) {
  const std::size_t n = g.rows();
  if (n == 1) return 1.0;
  constexpr int kIters = 200;
  std::vector<Complex> v = probe_vector(n);
  normalize_in_place(v);
  double lmax = 0.0;
  for (int it = 0; it < kIters; ++it) {
    std::vector<Complex> w(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) w[i] += g(i, j) * v[j];
    }
    lmax = normalize_in_place(w);
    v = std::move(w);
  }
  v = probe_vector(n);
  normalize_in_place(v);
  double inv_lmin = 0.0;
  for (int it = 0; it < kIters; ++it) {
    cholesky_solve(chol, v);
    inv_lmin = normalize_in_place(v);
  }
  return lmax * inv_lmin;
}

}  // namespace detail

// Largest condition number accepted by pseudo_inverse.
inline constexpr double kMaxConditionNumber = 1e12;

// Right inverse A^H (A A^H)^-1 of a full-row-rank matrix.
inline CMatrix pseudo_inverse(const CMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) throw ShapeError("pseudo_inverse: empty matrix");
  if (a.rows() > a.cols()) {
    throw SingularityError("pseudo_inverse: " + std::to_string(a.rows()) + "x" +
                           std::to_string(a.cols()) + " matrix cannot have full row rank");
  }
  const CMatrix ah = hermitian(a);
  const CMatrix gram = matmul(a, ah);
  const CMatrix chol = detail::cholesky(gram);
  const double cond = std::sqrt(detail::gram_condition(gram, chol));
  if (!(cond <= kMaxConditionNumber)) {
    throw SingularityError("pseudo_inverse: condition number " + std::to_string(cond) +
                           " exceeds limit");
  }
  const std::size_t n = a.rows();
  CMatrix inv(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<Complex> e(n);
    e[c] = 1.0;
    detail::cholesky_solve(chol, e);
    for (std::size_t r = 0; r < n; ++r) inv(r, c) = e[r];
  }
  return matmul(ah, inv);
}

// Bessel function of the first kind, order zero.
//
// Power series (extended precision) for |x| <= 12, Hankel asymptotic expansion
// beyond. Absolute error is below 1e-9 on the real line.
inline double bessel_j0(double x) {
  if (!std::isfinite(x)) throw DomainError("bessel_j0: non-finite argument");
  x = std::fabs(x);
  if (x <= 12.0) {
    const long double q = -static_cast<long double>(x) * x / 4.0L;
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int m = 1; m < 80; ++m) {
      term *= q / (static_cast<long double>(m) * m);
      sum += term;
      if (std::fabs(term) < 1e-22L) break;
    }
    return static_cast<double>(sum);
  }
  // a_k = prod_{j<=k} (-(2j-1)^2) / (k! 8^k); P and Q take alternating signs.
  double p = 0.0;
  double q = 0.0;
  double a = 1.0;
  double xpow = 1.0;
  double last = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 60; ++k) {
    if (k > 0) {
      const double odd = 2.0 * k - 1.0;
      a *= -(odd * odd) / (8.0 * k);
      xpow *= x;
    }
    const double term = a / xpow;
    if (std::fabs(term) > last) break;
    last = std::fabs(term);
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0) {
      p += sign * term;
    } else {
      q += sign * term;
    }
    if (last < 1e-18) break;
  }
  const double chi = x - std::numbers::pi / 4.0;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

// Deterministic random stream identified by (seed, label).
//
// Streams with different labels are seeded from independent hashes, so
// callers split work into labelled substreams rather than sharing one engine.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string label)
      : seed_(seed), label_(std::move(label)), engine_(derive(seed_, label_)) {}

  RngStream substream(std::string_view name) const {
    return RngStream(seed_, label_ + "/" + std::string(name));
  }

  std::uint64_t seed() const { return seed_; }
  const std::string& label() const { return label_; }

  // Uniform in [0, 1).
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    if (n == 0) throw DomainError("RngStream::index: empty range");
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  static std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t derive(std::uint64_t seed, std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : label) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return splitmix64(splitmix64(seed) ^ h);
  }

  std::uint64_t seed_;
  std::string label_;
  std::mt19937_64 engine_;
};

// Circularly-symmetric complex Gaussian with unit total variance.
inline Complex cgauss(RngStream& rng) {
  const double s = std::sqrt(0.5);
  const double re = rng.normal(0.0, s);
  const double im = rng.normal(0.0, s);
  return {re, im};
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

}  // namespace beamdrl
