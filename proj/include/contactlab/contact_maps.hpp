#pragma once

// Contactomorphisms of P+T*T^n built as compositions of primitives with
// closed-form inverses and declared cohomology actions.

#include <cmath>
#include <memory>
#include <numbers>
#include <type_traits>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "contactlab/contact_form.hpp"
#include "contactlab/geometry.hpp"
#include "contactlab/hamiltonian.hpp"
#include "contactlab/int_matrix.hpp"

namespace contactlab {

namespace primitives {

/// Canonical lift of the toral automorphism q -> Mq:
/// (u, q) -> (M^-T u / |M^-T u|, M q).
struct CanonicalLift {
  IntMatrix matrix;
  IntMatrix matrix_inverse;
  Eigen::Matrix3d forward = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d inverse_transpose = Eigen::Matrix3d::Identity();
};

/// Strict shear of P+T*T^2 homotopic to (theta, q1 + theta, q2):
/// (theta, q1 + theta - sin(4 pi theta)/(4 pi), q2 + cos(4 pi theta)/(4 pi)).
struct ShearA {
  bool inverted = false;
};

/// Companion of ShearA homotopic to (theta, q1, q2 + theta):
/// (theta, q1 + cos(4 pi theta)/(4 pi), q2 + theta + sin(4 pi theta)/(4 pi)).
struct ShearB {
  bool inverted = false;
};

/// (u, q) -> (u, q + t u); the time-t Reeb flow of the round form.
struct ReebTranslation {
  double t = 0.0;
};

/// Time-t map of the flow of a degree-one homogeneous Hamiltonian,
/// integrated with `steps` classical RK4 steps.
struct ContactFlow {
  std::shared_ptr<const Hamiltonian> hamiltonian;
  double t = 0.0;
  int steps = 256;
};

}  // namespace primitives

using Primitive = std::variant<primitives::CanonicalLift, primitives::ShearA, primitives::ShearB,
                               primitives::ReebTranslation, primitives::ContactFlow>;

inline constexpr int kFlowStepsPerUnitTime = 256;

inline Primitive canonical_lift(const IntMatrix& m) {
  if (m.size() != 2 && m.size() != 3) throw Error("canonical lift needs a 2x2 or 3x3 matrix");
  if (!m.is_unimodular()) throw Error("canonical lift needs |det M| = 1, got M = " + m.to_string());
  primitives::CanonicalLift c;
  c.matrix = m;
  c.matrix_inverse = m.inverse();
  const int n = m.size();
  c.forward.topLeftCorner(n, n) = m.to_eigen();
  c.inverse_transpose.topLeftCorner(n, n) = c.matrix_inverse.transpose().to_eigen();
  return c;
}

inline Primitive contact_flow(std::shared_ptr<const Hamiltonian> h, double t, int steps = 0) {
  if (!h) throw Error("contact flow needs a Hamiltonian");
  if (steps <= 0) steps = std::max(1, static_cast<int>(std::ceil(kFlowStepsPerUnitTime * std::abs(t))));
  return primitives::ContactFlow{std::move(h), t, steps};
}

inline std::string kind_name(const Primitive& p) {
  return std::visit(
      [](const auto& x) -> std::string {
        using P = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<P, primitives::CanonicalLift>) return "canonical_lift";
        else if constexpr (std::is_same_v<P, primitives::ShearA>) return x.inverted ? "shear_a_inverse" : "shear_a";
        else if constexpr (std::is_same_v<P, primitives::ShearB>) return x.inverted ? "shear_b_inverse" : "shear_b";
        else if constexpr (std::is_same_v<P, primitives::ReebTranslation>) return "reeb_translation";
        else return "contact_flow";
      },
      p);
}

/// Dimension the primitive is tied to, or 0 when it works for every n.
inline int required_dimension(const Primitive& p) {
  if (auto* c = std::get_if<primitives::CanonicalLift>(&p)) return c->matrix.size();
  if (std::holds_alternative<primitives::ShearA>(p) || std::holds_alternative<primitives::ShearB>(p)) return 2;
  if (auto* f = std::get_if<primitives::ContactFlow>(&p)) return f->hamiltonian->n;
  return 0;
}

namespace detail {

template <class T>
void shear(Element<T>& e, bool second, bool inverted) {
  using std::cos;
  using std::sin;
  constexpr double four_pi = 4.0 * std::numbers::pi;
  const T theta = angle_of(e);
  const T c = cos(four_pi * theta) / four_pi;
  const T s = sin(four_pi * theta) / four_pi;
  const double sign = inverted ? -1.0 : 1.0;
  if (!second) {
    e.q[0] += sign * (theta - s);
    e.q[1] += sign * c;
  } else {
    e.q[0] += sign * c;
    e.q[1] += sign * (theta + s);
  }
}

template <class T>
void flow(const primitives::ContactFlow& f, Element<T>& e) {
  using std::sqrt;
  const Hamiltonian& h = *f.hamiltonian;
  const int n = e.n;
  const double dt = f.t / f.steps;
  using Arr = std::array<T, kMaxDim>;
  Arr p = e.u, q = e.q;
  auto axpy = [n](const Arr& a, const Arr& b, double s) {
    Arr r = a;
    for (int i = 0; i < n; ++i) r[i] += s * b[i];
    return r;
  };
  for (int step = 0; step < f.steps; ++step) {
    Arr k1p{}, k1q{}, k2p{}, k2q{}, k3p{}, k3q{}, k4p{}, k4q{};
    h.vector_field(p, q, k1p, k1q);
    h.vector_field(axpy(p, k1p, 0.5 * dt), axpy(q, k1q, 0.5 * dt), k2p, k2q);
    h.vector_field(axpy(p, k2p, 0.5 * dt), axpy(q, k2q, 0.5 * dt), k3p, k3q);
    h.vector_field(axpy(p, k3p, dt), axpy(q, k3q, dt), k4p, k4q);
    double dq_max = 0.0;
    T norm(0.0);
    for (int i = 0; i < n; ++i) {
      const T dp = (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]) * (dt / 6.0);
      const T dq = (k1q[i] + 2.0 * k2q[i] + 2.0 * k3q[i] + k4q[i]) * (dt / 6.0);
      p[i] += dp;
      q[i] += dq;
      dq_max = std::max(dq_max, std::abs(value_of(dq)));
      norm += p[i] * p[i];
    }
    norm = sqrt(norm);
    const double nv = value_of(norm);
    if (!std::isfinite(nv) || !std::isfinite(dq_max) || nv < 0.5 || nv > 2.0 || dq_max > 0.25)
      throw Error("contact_flow integration diverged (step " + std::to_string(step) + " of " +
                  std::to_string(f.steps) + "); increase steps");
    for (int i = 0; i < n; ++i) p[i] /= norm;
  }
  e.u = p;
  e.q = q;
}

template <class T>
void apply_primitive(const Primitive& prim, Element<T>& e) {
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, primitives::CanonicalLift>) {
          std::array<T, kMaxDim> u{}, q{};
          for (int i = 0; i < e.n; ++i) {
            u[i] = T(0.0);
            q[i] = T(0.0);
            for (int j = 0; j < e.n; ++j) {
              u[i] += p.inverse_transpose(i, j) * e.u[j];
              q[i] += p.forward(i, j) * e.q[j];
            }
          }
          e.u = u;
          e.q = q;
          normalize_direction(e);
        } else if constexpr (std::is_same_v<P, primitives::ShearA>) {
          shear(e, false, p.inverted);
        } else if constexpr (std::is_same_v<P, primitives::ShearB>) {
          shear(e, true, p.inverted);
        } else if constexpr (std::is_same_v<P, primitives::ReebTranslation>) {
          for (int i = 0; i < e.n; ++i) e.q[i] += p.t * e.u[i];
        } else {
          flow(p, e);
        }
      },
      prim);
}

}  // namespace detail

inline Primitive inverse(const Primitive& prim) {
  return std::visit(
      [](const auto& p) -> Primitive {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, primitives::CanonicalLift>) return canonical_lift(p.matrix_inverse);
        else if constexpr (std::is_same_v<P, primitives::ShearA>) return primitives::ShearA{!p.inverted};
        else if constexpr (std::is_same_v<P, primitives::ShearB>) return primitives::ShearB{!p.inverted};
        else if constexpr (std::is_same_v<P, primitives::ReebTranslation>) return primitives::ReebTranslation{-p.t};
        else return primitives::ContactFlow{p.hamiltonian, -p.t, p.steps};
      },
      prim);
}

/// Size of the cohomology matrices: 3 for n = 2 (basis [dtheta], [dq1],
/// [dq2]), n for n >= 3.
inline int homology_size(int n) { return n == 2 ? 3 : n; }

/// Declared action I_f (inverse of the induced map on H^1) of one primitive.
inline IntMatrix homology_of(const Primitive& prim, int n) {
  const int s = homology_size(n);
  IntMatrix id = IntMatrix::identity(s);
  if (auto* c = std::get_if<primitives::CanonicalLift>(&prim)) {
    const IntMatrix block = c->matrix_inverse.transpose();
    if (n == 2) return block_diag(static_cast<std::int64_t>(c->matrix.det()), block);
    return block;
  }
  if (auto* a = std::get_if<primitives::ShearA>(&prim)) {
    id(0, 1) = a->inverted ? 1 : -1;
    return id;
  }
  if (auto* b = std::get_if<primitives::ShearB>(&prim)) {
    id(0, 2) = b->inverted ? 1 : -1;
    return id;
  }
  return id;  // Reeb translations and Hamiltonian flows are isotopic to the identity.
}

/// Composite contactomorphism. Primitives are applied left to right, so the
/// list [p1, ..., pm] is the map pm o ... o p1 and its cohomology action is
/// I_pm ... I_p1.
class ContactMap {
 public:
  explicit ContactMap(int n = 2, std::string id = "identity")
      : id_(std::move(id)), n_(n), homology_(IntMatrix::identity(homology_size(n))) {
    require_dimension(n);
  }

  static ContactMap make_composite(int n, std::vector<Primitive> prims, std::string id = "composite") {
    ContactMap f(n, std::move(id));
    for (auto& p : prims) {
      const int req = required_dimension(p);
      if (req != 0 && req != n)
        throw Error("dimension mismatch: primitive '" + kind_name(p) + "' acts on n=" + std::to_string(req) +
                    ", map has n=" + std::to_string(n));
      f.homology_ = homology_of(p, n) * f.homology_;
      f.prims_.push_back(std::move(p));
    }
    return f;
  }

  const std::string& id() const { return id_; }
  int dim() const { return n_; }
  const std::vector<Primitive>& primitives() const { return prims_; }
  const IntMatrix& homology_action() const { return homology_; }
  bool is_identity() const { return prims_.empty(); }

  template <class T>
  void apply(Element<T>& e) const {
    for (const auto& p : prims_) detail::apply_primitive(p, e);
  }

  CEPoint operator()(const CEPoint& x) const {
    if (x.dim() != n_) throw Error("point dimension does not match map");
    Element<double> e = lift<double>(x);
    apply(e);
    return project(e);
  }

  ContactMap inverse() const {
    ContactMap g(n_, id_ + "^-1");
    for (auto it = prims_.rbegin(); it != prims_.rend(); ++it) g.prims_.push_back(contactlab::inverse(*it));
    g.homology_ = homology_.inverse();
    return g;
  }

  /// this o g (g applied first).
  ContactMap after(const ContactMap& g) const {
    if (g.n_ != n_) throw Error("dimension mismatch in composition");
    ContactMap h(n_, id_ + "*" + g.id_);
    h.prims_ = g.prims_;
    h.prims_.insert(h.prims_.end(), prims_.begin(), prims_.end());
    h.homology_ = homology_ * g.homology_;
    return h;
  }

  ContactMap power(int k) const {
    if (k < 0) return inverse().power(-k);
    ContactMap r(n_, id_ + "^" + std::to_string(k));
    for (int i = 0; i < k; ++i) {
      r.prims_.insert(r.prims_.end(), prims_.begin(), prims_.end());
      r.homology_ = homology_ * r.homology_;
    }
    return r;
  }

 private:
  std::string id_;
  int n_ = 2;
  std::vector<Primitive> prims_;
  IntMatrix homology_;
};

inline CEPoint apply(const ContactMap& f, const CEPoint& x) { return f(x); }
inline ContactMap inverse(const ContactMap& f) { return f.inverse(); }
inline IntMatrix homology_action(const ContactMap& f) { return f.homology_action(); }

/// f o g
inline ContactMap compose(const ContactMap& f, const ContactMap& g) { return f.after(g); }

/// Conformal factor c(x) = (f* lambda / lambda)(x) together with f(x).
struct ConformalStep {
  double factor = 1.0;
  CEPoint image;
};

/// Evaluates lambda_{f(x)}(Df_x v) / lambda_x(v) for the chart vector v = d/dq_j
/// on which lambda_x is largest, using a single forward-mode directional
/// derivative. Fiber coefficients of lambda vanish, so only dq'/dq_j enters.
inline ConformalStep conformal_step(const ContactMap& f, const ContactForm& form, const CEPoint& x) {
  const int n = x.dim();
  int j = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(x.u.u[i]) > std::abs(x.u.u[j])) j = i;
  const double lambda_v = form.profile(x) * x.u.u[j];
  if (std::abs(lambda_v) < 1e-12) throw Error("degenerate transversal in conformal factor");
  using J1 = Jet<1>;
  Element<J1> e = lift<J1>(x);
  e.q[j].d[0] = 1.0;
  f.apply(e);
  ConformalStep out;
  out.image = project(e);
  double num = 0.0;
  for (int i = 0; i < n; ++i) num += out.image.u.u[i] * e.q[i].d[0];
  out.factor = form.profile(out.image) * num / lambda_v;
  return out;
}

inline double conformal_factor(const ContactMap& f, const ContactForm& form, const CEPoint& x) {
  return conformal_step(f, form, x).factor;
}

/// Jacobian of f in chart coordinates at x, with the chart of the image
/// chosen by the same rule as chart_point().
struct ChartJacobian {
  Eigen::MatrixXd matrix;
  CEPoint image;
  int image_chart = 0;
};

namespace detail {
template <int M>
ChartJacobian chart_jacobian(const ContactMap& f, const CEPoint& x) {
  const ChartPoint c = chart_point(x);
  std::array<Jet<M>, 5> seed{};
  for (int i = 0; i < M; ++i) seed[i] = Jet<M>::variable(c.x[i], i);
  Element<Jet<M>> e = from_chart(seed, c.n, c.chart);
  f.apply(e);
  ChartJacobian out;
  out.image = project(e);
  out.image_chart = chart_for(out.image.u);
  const auto y = to_chart(e, out.image_chart);
  out.matrix.resize(M, M);
  for (int r = 0; r < M; ++r)
    for (int k = 0; k < M; ++k) out.matrix(r, k) = y[r].d[k];
  return out;
}
}  // namespace detail

inline ChartJacobian map_jacobian(const ContactMap& f, const CEPoint& x) {
  return x.dim() == 2 ? detail::chart_jacobian<3>(f, x) : detail::chart_jacobian<5>(f, x);
}

/// Same Jacobian by central differences in chart coordinates.
inline Eigen::MatrixXd map_jacobian_fd(const ContactMap& f, const CEPoint& x, double step = 1e-5) {
  const ChartPoint c = chart_point(x);
  const int m = chart_size(c.n);
  const int image_chart = chart_for(f(x).u);
  auto eval = [&](std::array<double, 5> xs) {
    Element<double> e = from_chart(xs, c.n, c.chart);
    f.apply(e);
    return to_chart(e, image_chart);
  };
  Eigen::MatrixXd jac(m, m);
  for (int k = 0; k < m; ++k) {
    auto xp = c.x, xm = c.x;
    xp[k] += step;
    xm[k] -= step;
    const auto yp = eval(xp), ym = eval(xm);
    for (int r = 0; r < m; ++r) {
      double d = yp[r] - ym[r];
      if (c.n == 2 && r == 0) d -= std::round(d);  // angle output is defined mod 1
      jac(r, k) = d / (2.0 * step);
    }
  }
  return jac;
}

/// (f* lambda)_x in chart coordinates.
inline std::vector<double> pullback_form(const ContactMap& f, const ContactForm& form, const CEPoint& x) {
  const ChartJacobian jac = map_jacobian(f, x);
  const std::vector<double> at_image = eval_form(form, jac.image);
  const int m = static_cast<int>(at_image.size());
  std::vector<double> out(m, 0.0);
  for (int k = 0; k < m; ++k)
    for (int r = 0; r < m; ++r) out[k] += at_image[r] * jac.matrix(r, k);
  return out;
}

/// Relative distance of f* lambda from the line spanned by lambda at x; zero
/// for an exact contactomorphism.
inline double contact_residual(const ContactMap& f, const ContactForm& form, const CEPoint& x) {
  const auto pulled = pullback_form(f, form, x);
  const auto base = eval_form(form, x);
  std::size_t k = 0;
  for (std::size_t i = 1; i < base.size(); ++i)
    if (std::abs(base[i]) > std::abs(base[k])) k = i;
  const double c = pulled[k] / base[k];
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    num += (pulled[i] - c * base[i]) * (pulled[i] - c * base[i]);
    den += pulled[i] * pulled[i];
  }
  return std::sqrt(num / den);
}

}  // namespace contactlab
