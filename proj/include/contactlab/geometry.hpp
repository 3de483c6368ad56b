#pragma once

// Coordinates on T^n and on its space of cooriented contact elements
// P+T*T^n = S^{n-1} x T^n, for n in {2, 3}.

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "contactlab/error.hpp"
#include "contactlab/jet.hpp"

namespace contactlab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr int kMaxDim = 3;

/// Tolerance for geometric identity checks.
inline constexpr double kGeometryTol = 1e-9;
/// Tolerance for derivative checks against finite differences.
inline constexpr double kDerivativeTol = 1e-5;

inline void require_dimension(int n) {
  if (n != 2 && n != 3) throw Error("unsupported dimension n=" + std::to_string(n) + " (expected 2 or 3)");
}

/// Reduce a real number into [0, 1).
inline double wrap_unit(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

struct TorusPoint {
  int n = 2;
  std::array<double, kMaxDim> q{};

  double operator[](int i) const { return q[i]; }
  bool operator==(const TorusPoint&) const = default;
};

/// Reduce every coordinate mod 1.
inline TorusPoint wrap(const std::vector<double>& q) {
  require_dimension(static_cast<int>(q.size()));
  TorusPoint t;
  t.n = static_cast<int>(q.size());
  for (int i = 0; i < t.n; ++i) t.q[i] = wrap_unit(q[i]);
  return t;
}

inline TorusPoint wrap(const TorusPoint& p) {
  TorusPoint t = p;
  for (int i = 0; i < t.n; ++i) t.q[i] = wrap_unit(t.q[i]);
  return t;
}

/// Unit fiber direction. For n = 2 the angle is measured in revolutions:
/// u = (cos 2 pi theta, sin 2 pi theta).
struct Direction {
  int n = 2;
  std::array<double, kMaxDim> u{1.0, 0.0, 0.0};

  static Direction from_angle(double theta) {
    Direction d;
    d.n = 2;
    d.u = {std::cos(kTwoPi * theta), std::sin(kTwoPi * theta), 0.0};
    return d;
  }

  /// Normalizes `v`; throws on the zero vector.
  static Direction from_vector(const std::vector<double>& v) {
    require_dimension(static_cast<int>(v.size()));
    Direction d;
    d.n = static_cast<int>(v.size());
    double s = 0.0;
    for (double x : v) s += x * x;
    s = std::sqrt(s);
    if (!(s > 0.0)) throw Error("zero vector has no direction");
    d.u = {0.0, 0.0, 0.0};
    for (int i = 0; i < d.n; ++i) d.u[i] = v[i] / s;
    return d;
  }

  double theta() const { return wrap_unit(std::atan2(u[1], u[0]) / kTwoPi); }
  double operator[](int i) const { return u[i]; }
};

/// A point of P+T*T^n.
struct CEPoint {
  Direction u;
  TorusPoint q;

  int dim() const { return q.n; }
};

inline CEPoint make_point(double theta, double q1, double q2) {
  return CEPoint{Direction::from_angle(theta), wrap(std::vector<double>{q1, q2})};
}

/// A point of T*_0 T^n (nonzero covector p over base point q).
struct CotangentPoint {
  int n = 2;
  std::array<double, kMaxDim> p{};
  TorusPoint q;

  double p_norm() const {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += p[i] * p[i];
    return std::sqrt(s);
  }
};

/// Working representation used while evaluating maps: the unit direction
/// and an unwrapped base point, over scalar type T (double or Jet).
template <class T>
struct Element {
  int n = 2;
  std::array<T, kMaxDim> u{};
  std::array<T, kMaxDim> q{};
};

template <class T>
Element<T> lift(const CEPoint& x) {
  Element<T> e;
  e.n = x.dim();
  for (int i = 0; i < e.n; ++i) {
    e.u[i] = T(x.u.u[i]);
    e.q[i] = T(x.q.q[i]);
  }
  return e;
}

template <class T>
CEPoint project(const Element<T>& e) {
  CEPoint x;
  x.u.n = e.n;
  x.q.n = e.n;
  x.u.u = {0.0, 0.0, 0.0};
  for (int i = 0; i < e.n; ++i) {
    x.u.u[i] = value_of(e.u[i]);
    x.q.q[i] = wrap_unit(value_of(e.q[i]));
  }
  return x;
}

template <class T>
T angle_of(const Element<T>& e) {
  using std::atan2;
  return atan2(e.u[1], e.u[0]) / kTwoPi;
}

/// Normalize e.u in place.
template <class T>
void normalize_direction(Element<T>& e) {
  using std::sqrt;
  T s = e.u[0] * e.u[0];
  for (int i = 1; i < e.n; ++i) s += e.u[i] * e.u[i];
  s = sqrt(s);
  for (int i = 0; i < e.n; ++i) e.u[i] /= s;
}

// ---------------------------------------------------------------------------
// Charts. n = 2: global (theta, q1, q2). n = 3: (s1, s2, q1, q2, q3) with s a
// stereographic coordinate of u; chart 0 projects from the north pole and is
// used on the closed southern hemisphere, chart 1 projects from the south
// pole. Every point thus sits at |s| <= 1.

inline constexpr int chart_size(int n) { return 2 * n - 1; }

inline int chart_for(const Direction& u) { return (u.n == 3 && u.u[2] > 0.0) ? 1 : 0; }

template <class T>
std::array<T, 5> to_chart(const Element<T>& e, int chart) {
  std::array<T, 5> x{};
  if (e.n == 2) {
    x[0] = angle_of(e);
    x[1] = e.q[0];
    x[2] = e.q[1];
    return x;
  }
  const T denom = chart == 0 ? T(1.0) - e.u[2] : T(1.0) + e.u[2];
  x[0] = e.u[0] / denom;
  x[1] = e.u[1] / denom;
  for (int i = 0; i < 3; ++i) x[2 + i] = e.q[i];
  return x;
}

template <class T>
Element<T> from_chart(const std::array<T, 5>& x, int n, int chart) {
  using std::cos;
  using std::sin;
  Element<T> e;
  e.n = n;
  if (n == 2) {
    e.u[0] = cos(kTwoPi * x[0]);
    e.u[1] = sin(kTwoPi * x[0]);
    e.q[0] = x[1];
    e.q[1] = x[2];
    return e;
  }
  const T r2 = x[0] * x[0] + x[1] * x[1];
  const T d = T(1.0) + r2;
  e.u[0] = 2.0 * x[0] / d;
  e.u[1] = 2.0 * x[1] / d;
  e.u[2] = chart == 0 ? (r2 - 1.0) / d : (1.0 - r2) / d;
  for (int i = 0; i < 3; ++i) e.q[i] = x[2 + i];
  return e;
}

/// Chart coordinates of a point of P+T*T^n.
struct ChartPoint {
  int n = 2;
  int chart = 0;
  std::array<double, 5> x{};
};

inline ChartPoint chart_point(const CEPoint& p) {
  ChartPoint c;
  c.n = p.dim();
  c.chart = chart_for(p.u);
  c.x = to_chart(lift<double>(p), c.chart);
  return c;
}

inline CEPoint to_point(const ChartPoint& c) { return project(from_chart(c.x, c.n, c.chart)); }

// ---------------------------------------------------------------------------

/// Jacobian of `f` at `x` by forward-mode differentiation. `f` must accept
/// std::array<S, In> for S = Jet<In> and return std::array<S, Out>.
template <int In, int Out, class Fn>
Eigen::Matrix<double, Out, In> jacobian(Fn&& f, const std::array<double, In>& x) {
  using J = Jet<In>;
  std::array<J, In> seed;
  for (int i = 0; i < In; ++i) seed[i] = J::variable(x[i], i);
  const std::array<J, Out> y = f(seed);
  Eigen::Matrix<double, Out, In> m;
  for (int r = 0; r < Out; ++r)
    for (int c = 0; c < In; ++c) m(r, c) = y[r].d[c];
  return m;
}

/// Central finite-difference Jacobian of a double-valued map.
template <int In, int Out, class Fn>
Eigen::Matrix<double, Out, In> finite_difference_jacobian(Fn&& f, const std::array<double, In>& x,
                                                          double step = 1e-5) {
  Eigen::Matrix<double, Out, In> m;
  for (int c = 0; c < In; ++c) {
    auto xp = x, xm = x;
    xp[c] += step;
    xm[c] -= step;
    const std::array<double, Out> yp = f(xp), ym = f(xm);
    for (int r = 0; r < Out; ++r) m(r, c) = (yp[r] - ym[r]) / (2.0 * step);
  }
  return m;
}

/// n = 2: `resolution` equally spaced angles starting at 0.
/// n = 3: Fibonacci lattice with `resolution` points.
inline std::vector<Direction> sphere_grid(int n, int resolution) {
  require_dimension(n);
  if (resolution < 4) throw Error("sphere_grid: resolution must be >= 4");
  std::vector<Direction> out;
  out.reserve(resolution);
  if (n == 2) {
    for (int i = 0; i < resolution; ++i) out.push_back(Direction::from_angle(static_cast<double>(i) / resolution));
    return out;
  }
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < resolution; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / resolution;
    const double r = std::sqrt(1.0 - z * z);
    const double phi = golden * i;
    Direction d;
    d.n = 3;
    d.u = {r * std::cos(phi), r * std::sin(phi), z};
    out.push_back(d);
  }
  return out;
}

/// Uniform grid on T^n with `per_axis` points per coordinate, row-major.
inline std::vector<TorusPoint> torus_grid(int n, int per_axis) {
  require_dimension(n);
  if (per_axis < 1) throw Error("torus_grid: per_axis must be positive");
  std::vector<TorusPoint> out;
  int total = 1;
  for (int i = 0; i < n; ++i) total *= per_axis;
  out.reserve(total);
  for (int idx = 0; idx < total; ++idx) {
    TorusPoint t;
    t.n = n;
    int rem = idx;
    for (int i = n - 1; i >= 0; --i) {
      t.q[i] = static_cast<double>(rem % per_axis) / per_axis;
      rem /= per_axis;
    }
    out.push_back(t);
  }
  return out;
}

}  // namespace contactlab
