#pragma once

#include <array>
#include <cmath>

namespace contactlab {

/// Forward-mode derivative carrier: a value together with M partial
/// derivatives. Arithmetic applies the chain and product rules exactly.
template <int M>
struct Jet {
  double value = 0.0;
  std::array<double, M> d{};

  constexpr Jet() = default;
  constexpr Jet(double v) : value(v) {}  // NOLINT: constants promote implicitly
  constexpr Jet(double v, std::array<double, M> partials) : value(v), d(partials) {}

  /// Independent variable number `i` with value `v`.
  static constexpr Jet variable(double v, int i) {
    Jet j(v);
    j.d[i] = 1.0;
    return j;
  }

  Jet& operator+=(const Jet& o) {
    value += o.value;
    for (int i = 0; i < M; ++i) d[i] += o.d[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    value -= o.value;
    for (int i = 0; i < M; ++i) d[i] -= o.d[i];
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    for (int i = 0; i < M; ++i) d[i] = d[i] * o.value + value * o.d[i];
    value *= o.value;
    return *this;
  }
  Jet& operator/=(const Jet& o) {
    const double inv = 1.0 / o.value;
    for (int i = 0; i < M; ++i) d[i] = (d[i] - value * inv * o.d[i]) * inv;
    value *= inv;
    return *this;
  }
};

template <int M> Jet<M> operator-(Jet<M> a) {
  a.value = -a.value;
  for (auto& x : a.d) x = -x;
  return a;
}
template <int M> Jet<M> operator+(Jet<M> a, const Jet<M>& b) { return a += b; }
template <int M> Jet<M> operator-(Jet<M> a, const Jet<M>& b) { return a -= b; }
template <int M> Jet<M> operator*(Jet<M> a, const Jet<M>& b) { return a *= b; }
template <int M> Jet<M> operator/(Jet<M> a, const Jet<M>& b) { return a /= b; }
template <int M> Jet<M> operator+(Jet<M> a, double b) { a.value += b; return a; }
template <int M> Jet<M> operator+(double b, Jet<M> a) { a.value += b; return a; }
template <int M> Jet<M> operator-(Jet<M> a, double b) { a.value -= b; return a; }
template <int M> Jet<M> operator-(double b, const Jet<M>& a) { return -a + b; }
template <int M> Jet<M> operator*(Jet<M> a, double b) {
  a.value *= b;
  for (auto& x : a.d) x *= b;
  return a;
}
template <int M> Jet<M> operator*(double b, Jet<M> a) { return a * b; }
template <int M> Jet<M> operator/(Jet<M> a, double b) { return a * (1.0 / b); }
template <int M> Jet<M> operator/(double b, const Jet<M>& a) { return Jet<M>(b) / a; }

namespace detail {
template <int M> Jet<M> chain(const Jet<M>& a, double f, double df) {
  Jet<M> r(f);
  for (int i = 0; i < M; ++i) r.d[i] = df * a.d[i];
  return r;
}
}  // namespace detail

template <int M> Jet<M> sin(const Jet<M>& a) { return detail::chain(a, std::sin(a.value), std::cos(a.value)); }
template <int M> Jet<M> cos(const Jet<M>& a) { return detail::chain(a, std::cos(a.value), -std::sin(a.value)); }
template <int M> Jet<M> exp(const Jet<M>& a) {
  const double e = std::exp(a.value);
  return detail::chain(a, e, e);
}
template <int M> Jet<M> log(const Jet<M>& a) { return detail::chain(a, std::log(a.value), 1.0 / a.value); }
template <int M> Jet<M> sqrt(const Jet<M>& a) {
  const double s = std::sqrt(a.value);
  return detail::chain(a, s, 0.5 / s);
}
template <int M> Jet<M> atan2(const Jet<M>& y, const Jet<M>& x) {
  const double r2 = x.value * x.value + y.value * y.value;
  Jet<M> r(std::atan2(y.value, x.value));
  for (int i = 0; i < M; ++i) r.d[i] = (x.value * y.d[i] - y.value * x.d[i]) / r2;
  return r;
}

/// Value part of a scalar, for branch decisions that must not depend on
/// derivative data.
inline double value_of(double x) { return x; }
template <int M> double value_of(const Jet<M>& x) { return x.value; }

}  // namespace contactlab
