#pragma once

// Flat-Lagrangian shapes of toric domains U_lambda, the log-containment
// metric on star-shaped domains, linear actions and stable norms.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "contactlab/algebra.hpp"
#include "contactlab/contact_form.hpp"
#include "contactlab/geometry.hpp"
#include "contactlab/stats.hpp"

namespace contactlab {

/// Open bounded star-shaped subset of R^n given by radial values on a
/// direction grid. Lookups off the grid use the nearest grid direction.
class StarDomain {
 public:
  StarDomain(std::vector<Direction> dirs, std::vector<double> rho) : dirs_(std::move(dirs)), rho_(std::move(rho)) {
    if (dirs_.empty() || dirs_.size() != rho_.size()) throw Error("star domain needs one radius per direction");
    n_ = dirs_.front().n;
    for (double r : rho_)
      if (!(r > 0.0) || !std::isfinite(r)) throw Error("star domain radii must be positive and finite");
    const std::size_t m = dirs_.size();
    uniform_circle_ = n_ == 2;
    for (std::size_t i = 0; i < m && uniform_circle_; ++i) {
      const Direction e = Direction::from_angle(static_cast<double>(i) / m);
      uniform_circle_ = std::abs(e.u[0] - dirs_[i].u[0]) < 1e-12 && std::abs(e.u[1] - dirs_[i].u[1]) < 1e-12;
    }
  }

  static StarDomain ball(const std::vector<Direction>& dirs, double radius = 1.0) {
    return StarDomain(dirs, std::vector<double>(dirs.size(), radius));
  }

  int dim() const { return n_; }
  std::size_t size() const { return dirs_.size(); }
  const std::vector<Direction>& directions() const { return dirs_; }
  const std::vector<double>& radii() const { return rho_; }

  std::size_t nearest(const std::array<double, kMaxDim>& v) const {
    if (uniform_circle_) {
      const double theta = std::atan2(v[1], v[0]) / kTwoPi;
      const auto m = static_cast<long>(dirs_.size());
      long idx = std::lround(theta * m) % m;
      if (idx < 0) idx += m;
      return static_cast<std::size_t>(idx);
    }
    std::size_t best = 0;
    double bd = -2.0;
    for (std::size_t i = 0; i < dirs_.size(); ++i) {
      double d = 0.0;
      for (int k = 0; k < n_; ++k) d += dirs_[i].u[k] * v[k];
      if (d > bd) {
        bd = d;
        best = i;
      }
    }
    return best;
  }

  /// Radius in the direction of v (v need not be normalized).
  double radius(const std::array<double, kMaxDim>& v) const { return rho_[nearest(v)]; }

  /// Minkowski gauge: |v| / rho(v/|v|); the domain is {gauge < 1}.
  double gauge(const std::array<double, kMaxDim>& v) const {
    double s = 0.0;
    for (int k = 0; k < n_; ++k) s += v[k] * v[k];
    s = std::sqrt(s);
    return s == 0.0 ? 0.0 : s / radius(v);
  }

  bool contains(const std::array<double, kMaxDim>& v) const { return gauge(v) < 1.0; }

  bool same_grid(const StarDomain& o) const {
    if (o.dirs_.size() != dirs_.size() || o.n_ != n_) return false;
    for (std::size_t i = 0; i < dirs_.size(); ++i)
      for (int k = 0; k < n_; ++k)
        if (std::abs(dirs_[i].u[k] - o.dirs_[i].u[k]) > 1e-12) return false;
    return true;
  }

  /// CSV with columns u1..un, rho.
  void write_csv(std::ostream& os) const {
    for (int k = 0; k < n_; ++k) os << 'u' << (k + 1) << ',';
    os << "rho\n";
    os.precision(17);
    for (std::size_t i = 0; i < dirs_.size(); ++i) {
      for (int k = 0; k < n_; ++k) os << dirs_[i].u[k] << ',';
      os << rho_[i] << '\n';
    }
  }

 private:
  int n_ = 2;
  std::vector<Direction> dirs_;
  std::vector<double> rho_;
  bool uniform_circle_ = false;
};

/// Radial function of {v : the flat torus L_v lies in U_lambda}, an inner
/// approximation of Shape(U_lambda): rho(u) = min over the q-grid of F(u, q).
inline StarDomain flat_shape(const ContactForm& form, const std::vector<Direction>& dirs, int q_per_axis) {
  if (dirs.empty()) throw Error("flat_shape needs a nonempty direction grid");
  const auto qs = torus_grid(form.dim(), q_per_axis);
  std::vector<double> rho;
  rho.reserve(dirs.size());
  for (const auto& d : dirs) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& q : qs) m = std::min(m, form.profile(d, q));
    rho.push_back(m);
  }
  return StarDomain(dirs, std::move(rho));
}

/// delta(A, B) = log max(max rho_A/rho_B, max rho_B/rho_A) on a shared grid.
inline double delta(const StarDomain& a, const StarDomain& b) {
  if (!a.same_grid(b)) throw Error("delta: star domains use different direction grids");
  double c = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    c = std::max(c, a.radii()[i] / b.radii()[i]);
    c = std::max(c, b.radii()[i] / a.radii()[i]);
  }
  return std::log(c);
}

/// Image L(A) of a star domain under an invertible linear map, resampled on
/// A's grid: rho'(u) = rho_A(w/|w|)/|w| with w = L^-1 u.
inline StarDomain act(const Eigen::MatrixXd& map, const StarDomain& a) {
  const int n = a.dim();
  if (map.rows() != n || map.cols() != n) throw Error("act: matrix size does not match domain");
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(map);
  if (!lu.isInvertible()) throw Error("act: matrix is not invertible");
  const Eigen::MatrixXd inv = lu.inverse();
  std::vector<double> rho;
  rho.reserve(a.size());
  for (const auto& d : a.directions()) {
    std::array<double, kMaxDim> w{};
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) w[i] += inv(i, j) * d.u[j];
      norm += w[i] * w[i];
    }
    norm = std::sqrt(norm);
    rho.push_back(a.radius(w) / norm);
  }
  return StarDomain(a.directions(), std::move(rho));
}

template <class Z>
StarDomain act(const BasicIntMatrix<Z>& m, const StarDomain& a) {
  return act(m.to_eigen(), a);
}

namespace detail {
/// inf{c : L(A) is contained in cA}, evaluated by pushing A's boundary
/// points forward so the image never needs resampling.
inline double outer_factor(const Eigen::MatrixXd& map, const StarDomain& a) {
  const int n = a.dim();
  double c = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::array<double, kMaxDim> y{};
    for (int r = 0; r < n; ++r)
      for (int k = 0; k < n; ++k) y[r] += map(r, k) * a.directions()[i].u[k] * a.radii()[i];
    c = std::max(c, a.gauge(y));
  }
  return c;
}
}  // namespace detail

/// delta(A, L(A)) computed from A's samples alone.
inline double image_delta(const Eigen::MatrixXd& map, const Eigen::MatrixXd& map_inverse, const StarDomain& a) {
  return std::log(std::max({1.0, detail::outer_factor(map, a), detail::outer_factor(map_inverse, a)}));
}

struct DisplacementEstimate {
  double rate = 0.0;           ///< last-half regression slope of delta_k
  std::vector<double> deltas;  ///< delta(A, I^k A) for k = 1..k_max
};

/// Growth rate of delta(A, I^k A); a lower bound for the displacement of the
/// corresponding mapping class. Powers are formed in exact arithmetic.
inline DisplacementEstimate displacement_estimate(const IntMatrix& m, const StarDomain& a, int k_max) {
  if (k_max < 8) throw Error("displacement_estimate needs k_max >= 8");
  if (m.size() != a.dim()) throw Error("displacement_estimate: matrix size does not match domain");
  const BigMatrix fwd = BigMatrix::convert(m), bwd = BigMatrix::convert(m.inverse());
  BigMatrix pf = fwd, pb = bwd;
  DisplacementEstimate out;
  for (int k = 1; k <= k_max; ++k) {
    out.deltas.push_back(image_delta(pf.to_eigen(), pb.to_eigen(), a));
    pf = pf * fwd;
    pb = pb * bwd;
  }
  out.rate = last_half_fit(out.deltas, 1.0).slope;
  return out;
}

/// Symmetric positive-definite Gram matrix of a flat metric on T^n.
class FlatMetric {
 public:
  explicit FlatMetric(Eigen::MatrixXd g) : g_(std::move(g)) {
    if (g_.rows() != g_.cols() || (g_.rows() != 2 && g_.rows() != 3)) throw Error("flat metric must be 2x2 or 3x3");
    if ((g_ - g_.transpose()).cwiseAbs().maxCoeff() != 0.0) throw Error("flat metric must be exactly symmetric");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g_);
    if (es.eigenvalues().minCoeff() <= 1e-10) throw Error("flat metric must be positive definite");
  }
  const Eigen::MatrixXd& gram() const { return g_; }
  int dim() const { return static_cast<int>(g_.rows()); }
  ContactForm contact_form() const { return ContactForm::flat_metric(dim(), g_); }

 private:
  Eigen::MatrixXd g_;
};

/// Length of the shortest closed geodesic in the integer class gamma:
/// sqrt(gamma^T G gamma).
inline double stable_norm(const FlatMetric& g, const std::vector<std::int64_t>& gamma) {
  if (static_cast<int>(gamma.size()) != g.dim()) throw Error("class dimension does not match metric");
  if (std::all_of(gamma.begin(), gamma.end(), [](std::int64_t x) { return x == 0; })) throw Error("trivial class");
  Eigen::VectorXd v(g.dim());
  for (int i = 0; i < g.dim(); ++i) v[i] = static_cast<double>(gamma[i]);
  return std::sqrt(v.dot(g.gram() * v));
}

struct DualityReport {
  Eigen::MatrixXd metric;
  double worst_margin = 0.0;
  bool pass = false;
};

inline constexpr double kBoundaryShrink = 0.999;

/// Checks (b, gamma) <= l_gamma for every b on the flat-shape boundary of the
/// metric codisk bundle (shrunk by kBoundaryShrink, shapes being open) and
/// every sample class gamma.
inline DualityReport duality_check(const FlatMetric& g, const std::vector<std::vector<std::int64_t>>& classes,
                                   const std::vector<Direction>& dirs, int q_per_axis) {
  if (classes.empty() || dirs.empty()) throw Error("duality_check needs sample classes and directions");
  const StarDomain shape = flat_shape(g.contact_form(), dirs, q_per_axis);
  DualityReport rep;
  rep.metric = g.gram();
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& gamma : classes) {
    const double len = stable_norm(g, gamma);
    for (std::size_t i = 0; i < shape.size(); ++i) {
      double pairing = 0.0;
      for (int k = 0; k < g.dim(); ++k)
        pairing += kBoundaryShrink * shape.radii()[i] * shape.directions()[i].u[k] * static_cast<double>(gamma[k]);
      rep.worst_margin = std::min(rep.worst_margin, len - pairing);
    }
  }
  rep.pass = rep.worst_margin >= 0.0;
  return rep;
}

}  // namespace contactlab
