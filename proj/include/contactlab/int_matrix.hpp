#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <Eigen/Dense>

#include "contactlab/error.hpp"

namespace contactlab {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

/// Square integer matrix, row-major. Z is std::int64_t or BigInt.
template <class Z>
class BasicIntMatrix {
 public:
  BasicIntMatrix() = default;
  explicit BasicIntMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, Z(0)) {}
  BasicIntMatrix(int n, std::vector<Z> row_major) : n_(n), a_(std::move(row_major)) {
    if (a_.size() != static_cast<std::size_t>(n) * n) throw Error("matrix entry count does not match size");
  }

  static BasicIntMatrix identity(int n) {
    BasicIntMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = Z(1);
    return m;
  }

  /// Square matrix from a row-major list; the size must be a perfect square.
  static BasicIntMatrix from_row_major(const std::vector<Z>& v) {
    int n = 0;
    while (static_cast<std::size_t>(n) * n < v.size()) ++n;
    if (static_cast<std::size_t>(n) * n != v.size() || n == 0) throw Error("row-major array length is not a square");
    return BasicIntMatrix(n, v);
  }

  template <class W>
  static BasicIntMatrix convert(const BasicIntMatrix<W>& o) {
    BasicIntMatrix m(o.size());
    for (int i = 0; i < o.size(); ++i)
      for (int j = 0; j < o.size(); ++j) m(i, j) = static_cast<Z>(o(i, j));
    return m;
  }

  int size() const { return n_; }
  Z& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  const Z& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  const std::vector<Z>& row_major() const { return a_; }

  bool operator==(const BasicIntMatrix& o) const { return n_ == o.n_ && a_ == o.a_; }

  BasicIntMatrix operator*(const BasicIntMatrix& o) const {
    if (o.n_ != n_) throw Error("matrix size mismatch in product");
    BasicIntMatrix r(n_);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k) {
        if ((*this)(i, k) == 0) continue;
        for (int j = 0; j < n_; ++j) r(i, j) += (*this)(i, k) * o(k, j);
      }
    return r;
  }

  std::vector<Z> operator*(const std::vector<Z>& v) const {
    std::vector<Z> r(n_, Z(0));
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) r[i] += (*this)(i, j) * v[j];
    return r;
  }

  BasicIntMatrix transpose() const {
    BasicIntMatrix r(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }

  /// Exact determinant (fraction-free Bareiss elimination).
  BigInt det() const {
    std::vector<BigInt> m(a_.begin(), a_.end());
    auto at = [&](int i, int j) -> BigInt& { return m[static_cast<std::size_t>(i) * n_ + j]; };
    BigInt prev = 1;
    int sign = 1;
    for (int k = 0; k < n_ - 1; ++k) {
      if (at(k, k) == 0) {
        int p = k + 1;
        while (p < n_ && at(p, k) == 0) ++p;
        if (p == n_) return 0;
        for (int j = 0; j < n_; ++j) std::swap(at(k, j), at(p, j));
        sign = -sign;
      }
      for (int i = k + 1; i < n_; ++i)
        for (int j = k + 1; j < n_; ++j) at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
      prev = at(k, k);
    }
    return n_ == 0 ? BigInt(1) : sign * at(n_ - 1, n_ - 1);
  }

  bool is_unimodular() const {
    const BigInt d = det();
    return d == 1 || d == -1;
  }

  /// Inverse over the integers; throws unless |det| = 1.
  BasicIntMatrix inverse() const {
    if (!is_unimodular()) throw Error("integer matrix is not invertible over Z (|det| != 1)");
    std::vector<BigRational> m(static_cast<std::size_t>(n_) * 2 * n_);
    auto at = [&](int i, int j) -> BigRational& { return m[static_cast<std::size_t>(i) * 2 * n_ + j]; };
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) at(i, j) = BigRational(BigInt((*this)(i, j)));
      at(i, n_ + i) = 1;
    }
    for (int c = 0; c < n_; ++c) {
      int p = c;
      while (at(p, c) == 0) ++p;
      if (p != c)
        for (int j = 0; j < 2 * n_; ++j) std::swap(at(c, j), at(p, j));
      const BigRational piv = at(c, c);
      for (int j = 0; j < 2 * n_; ++j) at(c, j) /= piv;
      for (int i = 0; i < n_; ++i) {
        if (i == c || at(i, c) == 0) continue;
        const BigRational f = at(i, c);
        for (int j = 0; j < 2 * n_; ++j) at(i, j) -= f * at(c, j);
      }
    }
    BasicIntMatrix r(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        const BigRational& x = at(i, n_ + j);
        if (denominator(x) != 1) throw Error("inverse is not integral");
        r(i, j) = static_cast<Z>(numerator(x));
      }
    return r;
  }

  BasicIntMatrix pow(unsigned k) const {
    BasicIntMatrix r = identity(n_), b = *this;
    while (k) {
      if (k & 1u) r = r * b;
      b = b * b;
      k >>= 1u;
    }
    return r;
  }

  bool is_identity() const { return *this == identity(n_); }

  Eigen::MatrixXd to_eigen() const {
    Eigen::MatrixXd m(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m(i, j) = static_cast<double>((*this)(i, j));
    return m;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << '[';
    for (int i = 0; i < n_; ++i) {
      os << (i ? ", [" : "[");
      for (int j = 0; j < n_; ++j) os << (j ? ", " : "") << (*this)(i, j);
      os << ']';
    }
    os << ']';
    return os.str();
  }

 private:
  int n_ = 0;
  std::vector<Z> a_;
};

using IntMatrix = BasicIntMatrix<std::int64_t>;
using BigMatrix = BasicIntMatrix<BigInt>;

/// Block-diagonal matrix diag(a, B).
inline IntMatrix block_diag(std::int64_t a, const IntMatrix& b) {
  IntMatrix r(b.size() + 1);
  r(0, 0) = a;
  for (int i = 0; i < b.size(); ++i)
    for (int j = 0; j < b.size(); ++j) r(i + 1, j + 1) = b(i, j);
  return r;
}

}  // namespace contactlab
