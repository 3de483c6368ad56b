#pragma once

#include <cmath>
#include <limits>
#include <type_traits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "contactlab/geometry.hpp"
#include "contactlab/hamiltonian.hpp"
#include "contactlab/trig.hpp"

namespace contactlab {

/// One summand of a trigonometric profile:
/// amplitude * trig(2 pi <wave, q>) * fiber(u).
/// The fiber factor is either a harmonic trig(2 pi m theta) (n = 2 only) or a
/// monomial prod u_i^e_i; with neither set it is 1.
struct ProfileTerm {
  TrigTerm base{1.0, {}, Trig::One};
  int theta_harmonic = 0;
  Trig theta_kind = Trig::One;
  std::array<int, kMaxDim> exponents{};

  double fiber(const std::array<double, kMaxDim>& u, int n) const {
    double f = 1.0;
    if (theta_kind != Trig::One && n == 2) {
      const double theta = std::atan2(u[1], u[0]) / kTwoPi;
      const double a = kTwoPi * theta_harmonic * theta;
      f = theta_kind == Trig::Cos ? std::cos(a) : std::sin(a);
    }
    for (int i = 0; i < n; ++i)
      for (int e = 0; e < exponents[i]; ++e) f *= u[i];
    return f;
  }
};

namespace profiles {
struct Round {};
struct Constant {
  double value = 1.0;
};
struct TrigPolynomial {
  double constant = 1.0;
  std::vector<ProfileTerm> terms;
};
/// Profile of the unit codisk bundle of a flat metric G: 1/sqrt(u^T G^-1 u).
struct FlatMetric {
  Eigen::Matrix3d metric = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d inverse = Eigen::Matrix3d::Identity();
};
/// Level set {H = 1} of a positive degree-one Hamiltonian: 1/H(u, q).
struct HamiltonianLevel {
  std::shared_ptr<const Hamiltonian> hamiltonian;
};
}  // namespace profiles

using Profile = std::variant<profiles::Round, profiles::Constant, profiles::TrigPolynomial,
                             profiles::FlatMetric, profiles::HamiltonianLevel>;

/// Contact form F * lambda_round on P+T*T^n, where lambda_round at (u, q) is
/// <u, dq>. Its section of T*_0 T^n -> P+T*T^n is {p = F(u, q) u}.
class ContactForm {
 public:
  ContactForm() = default;
  ContactForm(std::string id, int n, Profile profile, double scale = 1.0)
      : id_(std::move(id)), n_(n), profile_(std::move(profile)), scale_(scale) {
    require_dimension(n);
    if (!(scale > 0.0)) throw Error("contact form scale must be positive");
    if (auto* fm = std::get_if<profiles::FlatMetric>(&profile_)) {
      const Eigen::Matrix3d& g = fm->metric;
      const Eigen::MatrixXd block = g.topLeftCorner(n, n);
      if (!block.isApprox(block.transpose(), 0.0)) throw Error("flat metric must be symmetric");
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
      if (es.eigenvalues().minCoeff() <= 1e-10) throw Error("flat metric must be positive definite");
      fm->inverse.setIdentity();
      fm->inverse.topLeftCorner(n, n) = block.inverse();
    }
    if (auto* hl = std::get_if<profiles::HamiltonianLevel>(&profile_)) {
      if (!hl->hamiltonian) throw Error("hamiltonian level form needs a Hamiltonian");
      if (hl->hamiltonian->n != n) throw Error("hamiltonian dimension does not match form");
    }
  }

  static ContactForm round(int n) { return ContactForm("round", n, profiles::Round{}); }
  static ContactForm constant(int n, double c) { return ContactForm("constant", n, profiles::Constant{c}); }
  static ContactForm flat_metric(int n, const Eigen::MatrixXd& g, std::string id = "flat_metric") {
    profiles::FlatMetric fm;
    fm.metric.setIdentity();
    fm.metric.topLeftCorner(n, n) = g;
    return ContactForm(std::move(id), n, fm);
  }

  const std::string& id() const { return id_; }
  int dim() const { return n_; }
  double scale() const { return scale_; }
  const Profile& profile_kind() const { return profile_; }
  bool is_round() const { return scale_ == 1.0 && std::holds_alternative<profiles::Round>(profile_); }

  /// Same profile multiplied by c > 0.
  ContactForm scaled(double c, std::string id = {}) const {
    ContactForm f = *this;
    if (!(c > 0.0)) throw Error("scale factor must be positive");
    f.scale_ *= c;
    if (!id.empty()) f.id_ = std::move(id);
    return f;
  }

  /// F(u, q). `u` must be a unit vector.
  double profile(const std::array<double, kMaxDim>& u, const std::array<double, kMaxDim>& q) const {
    return scale_ * std::visit([&](const auto& p) { return eval(p, u, q); }, profile_);
  }
  double profile(const Direction& u, const TorusPoint& q) const { return profile(u.u, q.q); }
  double profile(const CEPoint& x) const { return profile(x.u.u, x.q.q); }

  /// Cheap sufficient condition for F > 0; falls back to sampling.
  bool certified_positive() const {
    return std::visit(
        [&](const auto& p) -> bool {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, profiles::Round> || std::is_same_v<P, profiles::FlatMetric>) {
            return true;
          } else if constexpr (std::is_same_v<P, profiles::Constant>) {
            return p.value > 0.0;
          } else if constexpr (std::is_same_v<P, profiles::TrigPolynomial>) {
            double s = p.constant;
            for (const auto& t : p.terms) s -= std::abs(t.base.amplitude);  // |fiber| <= 1 on unit u
            return s > 0.0;
          } else {
            return p.hamiltonian->certified_positive();
          }
        },
        profile_);
  }

  /// Minimum of F over a grid with `per_axis` points per torus axis and
  /// `per_axis` fiber directions.
  double sampled_min(int per_axis = 64) const {
    const auto dirs = sphere_grid(n_, std::max(per_axis, 4));
    const auto qs = torus_grid(n_, per_axis);
    double m = std::numeric_limits<double>::infinity();
    for (const auto& d : dirs)
      for (const auto& q : qs) m = std::min(m, profile(d, q));
    return m;
  }

  /// Throws unless F > 0 everywhere (certified or sampled).
  void validate(int per_axis = 64) const {
    if (certified_positive()) return;
    const double m = sampled_min(per_axis);
    if (!(m > 0.0)) throw Error("contact form '" + id_ + "' profile is not positive (sampled min " + std::to_string(m) + ")");
  }

 private:
  static double eval(const profiles::Round&, const std::array<double, kMaxDim>&, const std::array<double, kMaxDim>&) {
    return 1.0;
  }
  static double eval(const profiles::Constant& c, const std::array<double, kMaxDim>&,
                     const std::array<double, kMaxDim>&) {
    return c.value;
  }
  double eval(const profiles::TrigPolynomial& t, const std::array<double, kMaxDim>& u,
              const std::array<double, kMaxDim>& q) const {
    double s = t.constant;
    for (const auto& term : t.terms) {
      TrigSeries one{0.0, {term.base}};
      s += one(q, n_) * term.fiber(u, n_);
    }
    return s;
  }
  double eval(const profiles::FlatMetric& m, const std::array<double, kMaxDim>& u,
              const std::array<double, kMaxDim>&) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) s += u[i] * m.inverse(i, j) * u[j];
    return 1.0 / std::sqrt(s);
  }
  static double eval(const profiles::HamiltonianLevel& h, const std::array<double, kMaxDim>& u,
                     const std::array<double, kMaxDim>& q) {
    return 1.0 / h.hamiltonian->value(u, q);
  }

  std::string id_ = "round";
  int n_ = 2;
  Profile profile_ = profiles::Round{};
  double scale_ = 1.0;
};

/// |z| = p / lambda: the R+-equivariant size of a covector relative to the
/// section of lambda.
inline double norm_of(const CotangentPoint& z, const ContactForm& form) {
  const double r = z.p_norm();
  if (!(r > 0.0)) throw Error("not in T*_0: zero covector");
  std::array<double, kMaxDim> u{};
  for (int i = 0; i < z.n; ++i) u[i] = z.p[i] / r;
  return r / form.profile(u, z.q.q);
}

/// Coefficients of lambda at x in chart coordinates: (dtheta, dq1, dq2) for
/// n = 2 and (ds1, ds2, dq1, dq2, dq3) for n = 3. Fiber coefficients vanish.
inline std::vector<double> eval_form(const ContactForm& form, const CEPoint& x) {
  const int n = x.dim();
  const double f = form.profile(x);
  std::vector<double> c(chart_size(n), 0.0);
  for (int i = 0; i < n; ++i) c[n - 1 + i] = f * x.u.u[i];
  return c;
}

}  // namespace contactlab
