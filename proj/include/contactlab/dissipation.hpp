#pragma once

// Dissipation sequence r_k(f, lambda), growth-rate estimates and the
// spectral lower bound check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "contactlab/algebra.hpp"
#include "contactlab/contact_form.hpp"
#include "contactlab/contact_maps.hpp"
#include "contactlab/parallel.hpp"
#include "contactlab/stats.hpp"

namespace contactlab {

/// Discretization of P+T*T^n: a uniform torus grid times a fiber grid.
struct SamplingGrid {
  int q_resolution = 64;      ///< points per torus axis
  int fiber_resolution = 128; ///< circle angles (n = 2) or Fibonacci directions (n = 3)

  static SamplingGrid defaults(int n) { return n == 2 ? SamplingGrid{64, 128} : SamplingGrid{16, 256}; }

  SamplingGrid refined(double factor) const {
    return {std::max(1, static_cast<int>(std::lround(q_resolution * factor))),
            std::max(4, static_cast<int>(std::lround(fiber_resolution * factor)))};
  }

  std::size_t count(int n) const {
    std::size_t c = fiber_resolution;
    for (int i = 0; i < n; ++i) c *= q_resolution;
    return c;
  }

  void validate() const {
    if (q_resolution < 1 || fiber_resolution < 4) throw Error("grid resolutions must be positive (fiber >= 4)");
  }
};

/// Enumerates the grid points of a SamplingGrid by flat index.
class GridPoints {
 public:
  GridPoints(int n, const SamplingGrid& g)
      : dirs_(sphere_grid(n, g.fiber_resolution)), qs_(torus_grid(n, g.q_resolution)) {}
  std::size_t size() const { return dirs_.size() * qs_.size(); }
  CEPoint operator[](std::size_t i) const { return CEPoint{dirs_[i % dirs_.size()], qs_[i / dirs_.size()]}; }

 private:
  std::vector<Direction> dirs_;
  std::vector<TorusPoint> qs_;
};

/// r_k(f, lambda) = max_x |log ((f^-k)* lambda / lambda)(x)| for k = 1..K, with
/// the max taken over the grid and over its forward images f^k(grid).
/// Backward orbits accumulate sum_{j<k} log c(f^-j x) with c = (f^-1)* lambda
/// / lambda. Forward orbits use the cocycle identity
/// log ((f^-k)* lambda / lambda)(f^k x) = -sum_{j<k} log (f* lambda / lambda)(f^j x),
/// which reaches the contracting side of the dynamics that a fixed grid misses.
inline std::vector<double> r_sequence(const ContactMap& f, const ContactForm& form, int steps,
                                      const SamplingGrid& grid) {
  if (steps < 1) throw Error("r_sequence needs K >= 1");
  if (form.dim() != f.dim()) throw Error("form and map dimensions differ");
  grid.validate();
  if (f.is_identity()) return std::vector<double>(steps, 0.0);
  const ContactMap back = f.inverse();
  const GridPoints pts(f.dim(), grid);
  std::vector<std::vector<double>> partial(worker_count(pts.size()), std::vector<double>(steps, 0.0));
  parallel_chunks(pts.size(), [&](std::size_t b, std::size_t e, std::size_t w) {
    auto& r = partial[w];
    for (std::size_t i = b; i < e; ++i) {
      for (const ContactMap* g : {&back, &f}) {
        CEPoint y = pts[i];
        double acc = 0.0;
        for (int k = 0; k < steps; ++k) {
          const ConformalStep s = conformal_step(*g, form, y);
          acc += std::log(s.factor);
          r[k] = std::max(r[k], std::abs(acc));
          y = s.image;
        }
      }
    }
  });
  std::vector<double> out(steps, 0.0);
  for (const auto& r : partial)
    for (int k = 0; k < steps; ++k) out[k] = std::max(out[k], r[k]);
  return out;
}

struct ChiEstimate {
  double slope = 0.0;              ///< authoritative estimate (last-half regression)
  double last = 0.0;               ///< r_K / K
  double intercept = 0.0;
  double relative_residual = 0.0;  ///< rms residual / mean |fit| over the fitted range
};

/// r_k is indexed from k = 1, so r_series[i] = r_{i+1}.
inline ChiEstimate chi_estimate(const std::vector<double>& r_series) {
  if (r_series.size() < 8) throw Error("chi_estimate needs at least 8 terms");
  const LinearFit fit = last_half_fit(r_series, 1.0);
  ChiEstimate c;
  c.slope = fit.slope;
  c.intercept = fit.intercept;
  c.last = r_series.back() / static_cast<double>(r_series.size());
  c.relative_residual = fit.mean_fitted_abs > 0 ? fit.rms_residual / fit.mean_fitted_abs : 0.0;
  return c;
}

enum class Verdict { EllipticConsistent, Hyperbolic, Indeterminate };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::EllipticConsistent: return "Elliptic-consistent";
    case Verdict::Hyperbolic: return "Hyperbolic";
    case Verdict::Indeterminate: return "Indeterminate";
  }
  return "?";
}

struct Thresholds {
  double hyperbolic_floor = 0.05;
  double max_relative_residual = 0.10;
  double bounded_ceiling = 0.5;
  double stall_increment = 1e-3;
};

/// Growth of the running maximum over the last quarter of the series:
/// max(r over last quarter) - max(r before it).
inline double last_quarter_increment(const std::vector<double>& r) {
  if (r.empty()) return 0.0;
  const std::size_t cut = r.size() - std::max<std::size_t>(1, r.size() / 4);
  const double head = cut ? *std::max_element(r.begin(), r.begin() + cut) : 0.0;
  const double tail = *std::max_element(r.begin() + cut, r.end());
  return tail - head;
}

/// Numerical classification. Elliptic-consistent only means the sampled
/// sequence looks bounded; it never certifies ellipticity.
inline Verdict classify(const std::vector<double>& r_series, const ChiEstimate& chi, const Thresholds& t = {}) {
  if (chi.slope > t.hyperbolic_floor && chi.relative_residual < t.max_relative_residual) return Verdict::Hyperbolic;
  const double top = r_series.empty() ? 0.0 : *std::max_element(r_series.begin(), r_series.end());
  if (top < t.bounded_ceiling && last_quarter_increment(r_series) < t.stall_increment)
    return Verdict::EllipticConsistent;
  return Verdict::Indeterminate;
}

/// Leading Lyapunov exponent estimate: (1/K) max_x |log ||D_x f^K|| | with the
/// operator norm in chart coordinates. Products are renormalized by their
/// Frobenius norm each step.
inline double lyapunov_estimate(const ContactMap& f, int steps, const SamplingGrid& grid) {
  if (steps < 8) throw Error("lyapunov_estimate needs K >= 8");
  grid.validate();
  if (f.is_identity()) return 0.0;
  const GridPoints pts(f.dim(), grid);
  const int m = chart_size(f.dim());
  std::vector<double> partial(worker_count(pts.size()), 0.0);
  parallel_chunks(pts.size(), [&](std::size_t b, std::size_t e, std::size_t w) {
    double best = 0.0;
    Eigen::MatrixXd prod(m, m);
    for (std::size_t i = b; i < e; ++i) {
      CEPoint x = pts[i];
      prod.setIdentity();
      double logsum = 0.0;
      for (int k = 0; k < steps; ++k) {
        const ChartJacobian jac = map_jacobian(f, x);
        prod = jac.matrix * prod;
        const double fro = prod.norm();
        prod /= fro;
        logsum += std::log(fro);
        x = jac.image;
      }
      const Eigen::JacobiSVD<Eigen::MatrixXd> svd(prod);
      best = std::max(best, std::abs(logsum + std::log(svd.singularValues()(0))));
    }
    partial[w] = best;
  });
  return *std::max_element(partial.begin(), partial.end()) / steps;
}

struct BoundCheck {
  double s_target = 0.0;
  double chi_hat = 0.0;
  double tolerance = 0.05;
  bool pass = false;
  IntMatrix target_matrix;  ///< A_I for n = 2, I_f otherwise
  bool declared_conservative = false;
  bool conservative_contradiction = false;
  Verdict verdict = Verdict::Indeterminate;
};

inline constexpr double kBoundTolerance = 0.05;

/// Spectral target for the growth bound: s(A_I) when n = 2, s(I_f) otherwise.
inline IntMatrix bound_matrix(const ContactMap& f) {
  return f.dim() == 2 ? a_block(f.homology_action()).block : f.homology_action();
}

/// Compares chi_hat against s of the cohomology action and flags a hyperbolic
/// verdict for a map declared conservative.
inline BoundCheck verify_bound(const ContactMap& f, const std::vector<double>& r_series, bool declared_conservative,
                               double tolerance = kBoundTolerance, const Thresholds& t = {}) {
  BoundCheck b;
  b.target_matrix = bound_matrix(f);
  b.s_target = s_value(b.target_matrix);
  const ChiEstimate chi = chi_estimate(r_series);
  b.chi_hat = chi.slope;
  b.tolerance = tolerance;
  b.pass = b.chi_hat >= b.s_target - tolerance;
  b.verdict = classify(r_series, chi, t);
  b.declared_conservative = declared_conservative;
  b.conservative_contradiction = declared_conservative && b.verdict == Verdict::Hyperbolic;
  return b;
}

inline BoundCheck verify_bound(const ContactMap& f, const ContactForm& form, int steps, const SamplingGrid& grid,
                               bool declared_conservative = false, double tolerance = kBoundTolerance,
                               const Thresholds& t = {}) {
  return verify_bound(f, r_sequence(f, form, steps, grid), declared_conservative, tolerance, t);
}

struct DissipationReport {
  std::string map_id;
  std::string lambda_id;
  int steps = 0;
  SamplingGrid grid;
  std::vector<double> r_series;
  ChiEstimate chi;
  std::optional<double> lyap_hat;
  Verdict verdict = Verdict::Indeterminate;
  std::optional<BoundCheck> bound_check;
};

inline DissipationReport dissipation_report(const ContactMap& f, const ContactForm& form, int steps,
                                            const SamplingGrid& grid, const Thresholds& t = {}) {
  DissipationReport rep;
  rep.map_id = f.id();
  rep.lambda_id = form.id();
  rep.steps = steps;
  rep.grid = grid;
  rep.r_series = r_sequence(f, form, steps, grid);
  rep.chi = chi_estimate(rep.r_series);
  rep.verdict = classify(rep.r_series, rep.chi, t);
  return rep;
}

}  // namespace contactlab
