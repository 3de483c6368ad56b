#pragma once

// Reference computations used to check the library. Each one recomputes a
// quantity by a different route (closed forms, finite differences, naive
// integer powers, dense eigen-solvers) so that agreement is meaningful.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "contactlab/contactlab.hpp"

namespace oracle {

using namespace contactlab;

inline constexpr double kGolden = 1.6180339887498949;
/// log((3 + sqrt 5)/2), the entropy of the cat map [[2,1],[1,1]].
inline const double kCatEntropy = std::log((3.0 + std::sqrt(5.0)) / 2.0);
/// log((1 + sqrt 5)/2).
inline const double kFibRate = std::log(kGolden);

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20240611);
  return g;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }
inline std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng());
}

inline CEPoint random_point(int n) {
  CEPoint x;
  if (n == 2) return make_point(uniform(0, 1), uniform(0, 1), uniform(0, 1));
  std::vector<double> v(3);
  do {
    for (auto& c : v) c = uniform(-1, 1);
  } while (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] < 0.05);
  x.u = Direction::from_vector(v);
  x.q = wrap(std::vector<double>{uniform(0, 1), uniform(0, 1), uniform(0, 1)});
  return x;
}

/// Difference of torus coordinates taken into (-1/2, 1/2].
inline double torus_diff(double a, double b) {
  double d = a - b;
  return d - std::round(d);
}

/// f* lambda / lambda at x by central differences of the map along the
/// round Reeb direction R = sum u_i d/dq_i, on which lambda_round(R) = 1.
/// Independent of the forward-mode path (different vector, no jets).
inline double fd_conformal_factor(const ContactMap& f, const ContactForm& form, const CEPoint& x,
                                  double h = 1e-6) {
  const int n = x.dim();
  CEPoint xp = x, xm = x;
  for (int i = 0; i < n; ++i) {
    xp.q.q[i] = x.q.q[i] + h * x.u.u[i];
    xm.q.q[i] = x.q.q[i] - h * x.u.u[i];
  }
  const CEPoint y = f(x), yp = f(xp), ym = f(xm);
  double pulled = 0.0;
  for (int i = 0; i < n; ++i) pulled += y.u.u[i] * torus_diff(yp.q.q[i], ym.q.q[i]) / (2 * h);
  return form.profile(y) * pulled / form.profile(x);
}

/// Matrix powers in long double.
inline Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> ld_power(const IntMatrix& m, int k) {
  const int n = m.size();
  Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> a(n, n), p;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = static_cast<long double>(m(i, j));
  p = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>::Identity(n, n);
  for (int i = 0; i < k; ++i) p = p * a;
  return p;
}

/// Eigenvalue moduli from a dense double eigen-solver.
inline std::vector<double> dense_moduli(const IntMatrix& m) {
  const Eigen::EigenSolver<Eigen::MatrixXd> es(m.to_eigen());
  std::vector<double> out;
  for (int i = 0; i < m.size(); ++i) out.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(out.begin(), out.end());
  return out;
}

inline double dense_s(const IntMatrix& m) {
  double s = 0.0;
  for (double r : dense_moduli(m)) s = std::max(s, std::abs(std::log(r)));
  return s;
}

/// Random matrix in SL(k, Z) as a product of elementary matrices, with all
/// entries bounded by `bound`.
inline IntMatrix random_sl(int k, int bound) {
  for (;;) {
    IntMatrix m = IntMatrix::identity(k);
    const int moves = static_cast<int>(uniform_int(2, 8));
    bool ok = true;
    for (int t = 0; t < moves && ok; ++t) {
      const int i = static_cast<int>(uniform_int(0, k - 1));
      int j = static_cast<int>(uniform_int(0, k - 2));
      if (j >= i) ++j;
      const std::int64_t c = uniform_int(-2, 2);
      if (c == 0) continue;
      for (int col = 0; col < k; ++col) m(i, col) += c * m(j, col);
      for (int r = 0; r < k && ok; ++r)
        for (int col = 0; col < k; ++col) ok = ok && std::abs(m(r, col)) <= bound;
    }
    if (ok && m.det() == 1) return m;
  }
}

inline IntMatrix random_hyperbolic_sl(int k, int bound) {
  for (;;) {
    const IntMatrix m = random_sl(k, bound);
    if (dense_s(m) > 0.05) return m;
  }
}

/// Fibonacci lengths of sigma^n(a) for sigma: a -> ab, b -> a.
inline std::vector<double> fibonacci_log_lengths(int steps) {
  std::vector<double> out;
  double a = 1, b = 1;  // |sigma^0(a)| = 1, |sigma^1(a)| = 2
  for (int k = 0; k <= steps; ++k) {
    out.push_back(std::log(k == 0 ? 1.0 : a + b));
    if (k > 0) {
      const double next = a + b;
      a = b;
      b = next;
    }
  }
  return out;
}

/// r_k for the canonical lift of M on the round form, by direct matrix powers:
/// max over sampled unit u of |log |(M^T)^k u||, together with the same
/// quantity for M^-T (forward orbits).
inline double lift_r(const IntMatrix& m, int k, const std::vector<Direction>& dirs) {
  const int n = m.size();
  const auto fwd = ld_power(m.transpose(), k);
  const auto bwd = ld_power(m.inverse().transpose(), k);
  double best = 0.0;
  for (const auto& d : dirs) {
    Eigen::Matrix<long double, Eigen::Dynamic, 1> u(n);
    for (int i = 0; i < n; ++i) u(i) = d.u[i];
    best = std::max(best, static_cast<double>(std::abs(std::log((fwd * u).norm()))));
    best = std::max(best, static_cast<double>(std::abs(std::log((bwd * u).norm()))));
  }
  return best;
}

/// Largest singular value of an integer matrix power, via long double.
inline double log_opnorm_power(const IntMatrix& m, int k) {
  const auto p = ld_power(m, k);
  Eigen::MatrixXd d = p.cast<double>();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(d);
  return std::log(svd.singularValues()(0));
}

/// Trigonometric profile 1 + sum a_i cos(2 pi (<w_i, q>)) * cos(2 pi h_i theta)
/// with small random amplitudes, positive by construction.
inline ContactForm random_trig_form(int n, double total_amplitude, int max_harmonic = 2) {
  profiles::TrigPolynomial tp;
  tp.constant = 1.0;
  const int terms = static_cast<int>(uniform_int(1, 3));
  for (int t = 0; t < terms; ++t) {
    ProfileTerm pt;
    pt.base.amplitude = uniform(-total_amplitude, total_amplitude) / terms;
    pt.base.kind = uniform(0, 1) < 0.5 ? Trig::Cos : Trig::Sin;
    for (int i = 0; i < n; ++i) pt.base.wave[i] = static_cast<int>(uniform_int(-2, 2));
    if (n == 2 && uniform(0, 1) < 0.5) {
      pt.theta_harmonic = static_cast<int>(uniform_int(1, max_harmonic));
      pt.theta_kind = Trig::Cos;
    }
    tp.terms.push_back(pt);
  }
  return ContactForm("trig", n, tp);
}

}  // namespace oracle
