#pragma once

// Exact univariate polynomials (coefficients low -> high) and a
// simultaneous-iteration root finder.

#include <algorithm>
#include <complex>
#include <numeric>
#include <utility>
#include <vector>

#include "contactlab/int_matrix.hpp"

namespace contactlab {

using IntPoly = std::vector<BigInt>;
using RatPoly = std::vector<BigRational>;

template <class C>
void trim(std::vector<C>& p) {
  while (p.size() > 1 && p.back() == 0) p.pop_back();
}

template <class C>
int degree(const std::vector<C>& p) {
  for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i)
    if (p[i] != 0) return i;
  return -1;
}

/// Characteristic polynomial det(tI - M) by Faddeev-LeVerrier. All divisions
/// are exact over the integers.
template <class Z>
IntPoly characteristic_polynomial(const BasicIntMatrix<Z>& a) {
  const int n = a.size();
  const BigMatrix m = BigMatrix::convert(a);
  IntPoly c(n + 1, BigInt(0));
  c[n] = 1;
  BigMatrix mk(n);  // M_0 = 0
  for (int k = 1; k <= n; ++k) {
    BigMatrix next = m * mk;
    for (int i = 0; i < n; ++i) next(i, i) += c[n - k + 1];
    mk = std::move(next);
    const BigMatrix am = m * mk;
    BigInt tr = 0;
    for (int i = 0; i < n; ++i) tr += am(i, i);
    if (tr % k != 0) throw Error("Faddeev-LeVerrier: inexact division");
    c[n - k] = -tr / k;
  }
  return c;
}

/// Exact division by a monic divisor; returns {quotient, remainder}.
inline std::pair<IntPoly, IntPoly> divide_monic(IntPoly num, const IntPoly& den) {
  const int dd = degree(den);
  if (dd < 0 || den[dd] != 1) throw Error("divide_monic: divisor must be monic");
  const int dn = degree(num);
  if (dn < dd) return {IntPoly{0}, num};
  IntPoly q(dn - dd + 1, BigInt(0));
  for (int i = dn; i >= dd; --i) {
    const BigInt coef = num[i];
    if (coef == 0) continue;
    q[i - dd] = coef;
    for (int j = 0; j <= dd; ++j) num[i - dd + j] -= coef * den[j];
  }
  num.resize(std::max(dd, 1));
  trim(num);
  trim(q);
  return {q, num};
}

inline bool is_zero(const IntPoly& p) { return degree(p) < 0; }

/// m-th cyclotomic polynomial.
inline IntPoly cyclotomic(int m) {
  IntPoly p(m + 1, BigInt(0));
  p[0] = -1;
  p[m] = 1;
  for (int d = 1; d < m; ++d)
    if (m % d == 0) p = divide_monic(p, cyclotomic(d)).first;
  return p;
}

inline int euler_phi(int m) {
  int r = 0;
  for (int k = 1; k <= m; ++k)
    if (std::gcd(k, m) == 1) ++r;
  return r;
}

namespace detail {

inline RatPoly to_rational(const IntPoly& p) { return RatPoly(p.begin(), p.end()); }

inline RatPoly derivative(const RatPoly& p) {
  if (p.size() <= 1) return {BigRational(0)};
  RatPoly d(p.size() - 1);
  for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = p[i] * static_cast<int>(i);
  trim(d);
  return d;
}

inline std::pair<RatPoly, RatPoly> divmod(RatPoly num, const RatPoly& den) {
  const int dd = degree(den);
  const int dn = degree(num);
  if (dn < dd) return {{BigRational(0)}, num};
  RatPoly q(dn - dd + 1, BigRational(0));
  for (int i = dn; i >= dd; --i) {
    if (num[i] == 0) continue;
    const BigRational c = num[i] / den[dd];
    q[i - dd] = c;
    for (int j = 0; j <= dd; ++j) num[i - dd + j] -= c * den[j];
  }
  num.resize(std::max(dd, 1));
  trim(num);
  trim(q);
  return {q, num};
}

inline RatPoly monic(RatPoly p) {
  trim(p);
  const int d = degree(p);
  if (d < 0) return p;
  const BigRational lead = p[d];
  for (auto& c : p) c /= lead;
  return p;
}

inline RatPoly gcd(RatPoly a, RatPoly b) {
  trim(a);
  trim(b);
  while (degree(b) >= 0) {
    RatPoly r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return monic(a);
}

inline RatPoly sub(RatPoly a, const RatPoly& b) {
  if (a.size() < b.size()) a.resize(b.size(), BigRational(0));
  for (std::size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
  trim(a);
  return a;
}

}  // namespace detail

/// Yun's square-free decomposition of a monic polynomial: pairs
/// (square-free factor, multiplicity) whose product is p.
inline std::vector<std::pair<RatPoly, int>> squarefree_factors(const IntPoly& p) {
  using namespace detail;
  std::vector<std::pair<RatPoly, int>> out;
  const RatPoly f = monic(to_rational(p));
  if (degree(f) <= 0) return out;
  const RatPoly fp = derivative(f);
  const RatPoly a0 = gcd(f, fp);
  RatPoly b = divmod(f, a0).first;
  RatPoly c = divmod(fp, a0).first;
  RatPoly d = sub(c, derivative(b));
  for (int i = 1; degree(b) > 0; ++i) {
    const RatPoly a = gcd(b, d);
    if (degree(a) > 0) out.emplace_back(a, i);
    b = divmod(b, a).first;
    c = divmod(d, a).first;
    d = sub(c, derivative(b));
  }
  return out;
}

inline constexpr double kRootTolerance = 1e-10;
inline constexpr int kRootMaxIterations = 2000;

/// All complex roots of a polynomial with simple roots, by Durand-Kerner
/// iteration. Throws if the relative residual does not fall below
/// kRootTolerance within kRootMaxIterations sweeps.
inline std::vector<std::complex<double>> simple_roots(const std::vector<double>& coeffs) {
  using cd = std::complex<double>;
  int d = static_cast<int>(coeffs.size()) - 1;
  while (d > 0 && coeffs[d] == 0.0) --d;
  if (d <= 0) return {};
  std::vector<double> a(coeffs.begin(), coeffs.begin() + d + 1);
  for (auto& c : a) c /= coeffs[d];
  if (d == 1) return {cd(-a[0], 0.0)};
  auto eval = [&](cd z) {
    cd s = 0.0;
    for (int i = d; i >= 0; --i) s = s * z + a[i];
    return s;
  };
  auto scale = [&](cd z) {
    double s = 0.0, r = std::abs(z), pw = 1.0;
    for (int i = 0; i <= d; ++i, pw *= r) s += std::abs(a[i]) * pw;
    return s;
  };
  double bound = 0.0;
  for (int i = 0; i < d; ++i) bound = std::max(bound, std::abs(a[i]));
  bound = 1.0 + bound;
  std::vector<cd> z(d);
  const cd seed(0.4, 0.9);
  cd pw = 1.0;
  for (int i = 0; i < d; ++i) {
    pw *= seed;
    z[i] = pw * (bound / std::abs(pw)) * 0.5;
  }
  for (int it = 0; it < kRootMaxIterations; ++it) {
    double change = 0.0;
    for (int i = 0; i < d; ++i) {
      cd den = 1.0;
      for (int j = 0; j < d; ++j)
        if (j != i) den *= (z[i] - z[j]);
      const cd step = eval(z[i]) / den;
      z[i] -= step;
      change = std::max(change, std::abs(step) / (1.0 + std::abs(z[i])));
    }
    if (change < 1e-15) break;
  }
  for (const auto& r : z)
    if (!(std::abs(eval(r)) <= kRootTolerance * scale(r)))
      throw Error("polynomial root solver did not converge");
  return z;
}

/// Complex roots of an integer polynomial, repeated by multiplicity.
inline std::vector<std::complex<double>> roots(const IntPoly& p) {
  std::vector<std::complex<double>> out;
  for (const auto& [factor, mult] : squarefree_factors(p)) {
    std::vector<double> c;
    for (const auto& x : factor) c.push_back(static_cast<double>(x));
    for (const auto& r : simple_roots(c))
      for (int k = 0; k < mult; ++k) out.push_back(r);
  }
  return out;
}

}  // namespace contactlab
