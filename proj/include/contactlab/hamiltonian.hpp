#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "contactlab/trig.hpp"

namespace contactlab {

/// Degree-one homogeneous Hamiltonian on T*_0 T^n:
///
///   H(p, q) = w(q) * sqrt(p^T S p) + <X(q), p>
///
/// with w a trigonometric weight, S symmetric positive definite and X a
/// trigonometric vector field on the base.
struct Hamiltonian {
  int n = 2;
  TrigSeries weight{1.0, {}};
  Eigen::Matrix3d quadratic = Eigen::Matrix3d::Identity();
  std::array<TrigSeries, kMaxDim> drift{};

  template <class T>
  T value(const std::array<T, kMaxDim>& p, const std::array<T, kMaxDim>& q) const {
    using std::sqrt;
    T h = weight(q, n) * sqrt(quad(p));
    for (int i = 0; i < n; ++i)
      if (!drift[i].terms.empty() || drift[i].constant != 0.0) h += drift[i](q, n) * p[i];
    return h;
  }

  /// Hamiltonian vector field: dq = dH/dp, dp = -dH/dq.
  template <class T>
  void vector_field(const std::array<T, kMaxDim>& p, const std::array<T, kMaxDim>& q,
                    std::array<T, kMaxDim>& dp, std::array<T, kMaxDim>& dq) const {
    using std::sqrt;
    const T norm = sqrt(quad(p));
    const T w = weight(q, n);
    const auto gw = weight.gradient(q, n);
    for (int i = 0; i < n; ++i) {
      T sp(0.0);
      for (int j = 0; j < n; ++j) sp += quadratic(i, j) * p[j];
      dq[i] = w * sp / norm + drift[i](q, n);
      dp[i] = -(gw[i] * norm);
    }
    for (int k = 0; k < n; ++k) {
      if (drift[k].terms.empty()) continue;
      const auto gx = drift[k].gradient(q, n);
      for (int i = 0; i < n; ++i) dp[i] -= p[k] * gx[i];
    }
  }

  /// True when H > 0 on T*_0 T^n can be certified from the coefficients.
  bool certified_positive() const {
    double drift_bound = 0.0;
    for (int i = 0; i < n; ++i) {
      double b = std::abs(drift[i].constant);
      for (const auto& t : drift[i].terms) b += std::abs(t.amplitude);
      drift_bound += b * b;
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(quadratic.topLeftCorner(n, n));
    const double smin = std::sqrt(std::max(es.eigenvalues().minCoeff(), 0.0));
    return weight.lower_bound() * smin > std::sqrt(drift_bound);
  }

 private:
  template <class T>
  T quad(const std::array<T, kMaxDim>& p) const {
    T s(0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += quadratic(i, j) * (p[i] * p[j]);
    return s;
  }
};

}  // namespace contactlab
