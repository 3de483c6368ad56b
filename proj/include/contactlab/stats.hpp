#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "contactlab/error.hpp"

namespace contactlab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  double mean_fitted_abs = 0.0;  ///< mean |fitted value| over the samples
};

/// Ordinary least squares y ~ slope * x + intercept.
inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("least_squares needs at least two matched samples");
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0, fa = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = fit.slope * x[i] + fit.intercept;
    ss += (y[i] - f) * (y[i] - f);
    fa += std::abs(f);
  }
  fit.rms_residual = std::sqrt(ss / m);
  fit.mean_fitted_abs = fa / m;
  return fit;
}

/// Least-squares slope of y[i] against i + offset over the second half
/// (indices floor(size/2) .. size-1).
inline LinearFit last_half_fit(const std::vector<double>& y, double offset = 0.0) {
  const std::size_t start = y.size() / 2;
  std::vector<double> xs, ys;
  for (std::size_t i = start; i < y.size(); ++i) {
    xs.push_back(static_cast<double>(i) + offset);
    ys.push_back(y[i]);
  }
  return least_squares(xs, ys);
}

}  // namespace contactlab
