// Small fixed-capacity vectors and square matrices for points of the
// ambient Euclidean space. Ranks handled by this library are small, so
// both types live on the stack and never allocate.

#ifndef HOPROC_VECTOR_HPP_
#define HOPROC_VECTOR_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>

namespace hop {

inline constexpr std::size_t kMaxRank = 8;

class Vector {
public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : n_(check_size(n)) {
    std::fill_n(c_.begin(), n_, fill);
  }
  Vector(std::initializer_list<double> init) : n_(check_size(init.size())) {
    std::copy(init.begin(), init.end(), c_.begin());
  }
  explicit Vector(std::span<const double> s) : n_(check_size(s.size())) {
    std::copy(s.begin(), s.end(), c_.begin());
  }

  std::size_t size() const { return n_; }
  bool empty() const { return n_ == 0; }
  double& operator[](std::size_t i) { return c_[i]; }
  double operator[](std::size_t i) const { return c_[i]; }
  double* data() { return c_.data(); }
  const double* data() const { return c_.data(); }
  double* begin() { return c_.data(); }
  double* end() { return c_.data() + n_; }
  const double* begin() const { return c_.data(); }
  const double* end() const { return c_.data() + n_; }
  std::span<const double> span() const { return {c_.data(), n_}; }

  Vector& operator+=(const Vector& o) {
    for (std::size_t i = 0; i < n_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Vector& operator-=(const Vector& o) {
    for (std::size_t i = 0; i < n_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Vector& operator*=(double s) {
    for (std::size_t i = 0; i < n_; ++i) c_[i] *= s;
    return *this;
  }
  Vector& operator/=(double s) { return *this *= 1.0 / s; }
  // this += s * o
  Vector& axpy(double s, const Vector& o) {
    for (std::size_t i = 0; i < n_; ++i) c_[i] += s * o.c_[i];
    return *this;
  }

  friend Vector operator+(Vector a, const Vector& b) { return a += b; }
  friend Vector operator-(Vector a, const Vector& b) { return a -= b; }
  friend Vector operator-(Vector a) { return a *= -1.0; }
  friend Vector operator*(Vector a, double s) { return a *= s; }
  friend Vector operator*(double s, Vector a) { return a *= s; }
  friend Vector operator/(Vector a, double s) { return a /= s; }

  friend bool operator==(const Vector& a, const Vector& b) {
    return a.n_ == b.n_ && std::equal(a.begin(), a.end(), b.begin());
  }

  bool all_finite() const {
    return std::all_of(begin(), end(), [](double v) { return std::isfinite(v); });
  }

private:
  static std::uint8_t check_size(std::size_t n) {
    if (n > kMaxRank)
      throw std::length_error("Vector: dimension " + std::to_string(n) +
                              " exceeds kMaxRank");
    return static_cast<std::uint8_t>(n);
  }

  std::array<double, kMaxRank> c_{};
  std::uint8_t n_ = 0;
};

inline double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
inline double norm2(const Vector& a) { return dot(a, a); }
inline double norm(const Vector& a) { return std::sqrt(norm2(a)); }
inline double distance(const Vector& a, const Vector& b) { return norm(a - b); }
inline double max_abs_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Row-major n x n matrix.
class Matrix {
public:
  Matrix() = default;
  explicit Matrix(std::size_t n) : n_(n) {
    if (n > kMaxRank) throw std::length_error("Matrix: dimension exceeds kMaxRank");
  }
  static Matrix identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * kMaxRank + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * kMaxRank + j]; }

  Vector apply(const Vector& x) const {
    Vector y(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n_; ++j) s += (*this)(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }
  Vector apply_transpose(const Vector& x) const {
    Vector y(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n_; ++i) s += (*this)(i, j) * x[i];
      y[j] = s;
    }
    return y;
  }
  Matrix transpose() const {
    Matrix t(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }
  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix c(a.n_);
    for (std::size_t i = 0; i < a.n_; ++i)
      for (std::size_t k = 0; k < a.n_; ++k) {
        double aik = a(i, k);
        for (std::size_t j = 0; j < a.n_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }
  double max_abs_diff(const Matrix& o) const {
    double m = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        m = std::max(m, std::abs((*this)(i, j) - o(i, j)));
    return m;
  }

private:
  std::array<double, kMaxRank * kMaxRank> a_{};
  std::size_t n_ = 0;
};

}  // namespace hop

#endif
