#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "contactlab/geometry.hpp"

namespace contactlab {

enum class Trig { One, Cos, Sin };

inline Trig parse_trig(const std::string& s) {
  if (s == "one") return Trig::One;
  if (s == "cos") return Trig::Cos;
  if (s == "sin") return Trig::Sin;
  throw Error("unknown trig kind '" + s + "' (expected one|cos|sin)");
}

inline const char* to_string(Trig t) {
  switch (t) {
    case Trig::One: return "one";
    case Trig::Cos: return "cos";
    case Trig::Sin: return "sin";
  }
  return "?";
}

/// amplitude * trig(2 pi <wave, q>)
struct TrigTerm {
  double amplitude = 0.0;
  std::array<int, kMaxDim> wave{};
  Trig kind = Trig::Cos;
};

/// Real trigonometric polynomial on T^n.
struct TrigSeries {
  double constant = 0.0;
  std::vector<TrigTerm> terms;

  bool is_constant() const {
    for (const auto& t : terms)
      if (t.kind != Trig::One && t.amplitude != 0.0) return false;
    return true;
  }

  /// Lower bound for the series: constant minus the sum of |amplitudes|.
  double lower_bound() const {
    double s = constant;
    for (const auto& t : terms) s -= t.kind == Trig::One ? -t.amplitude : std::abs(t.amplitude);
    return s;
  }

  template <class T>
  T operator()(const std::array<T, kMaxDim>& q, int n) const {
    using std::cos;
    using std::sin;
    T s(constant);
    for (const auto& t : terms) {
      if (t.kind == Trig::One) {
        s += T(t.amplitude);
        continue;
      }
      T phase(0.0);
      for (int i = 0; i < n; ++i)
        if (t.wave[i] != 0) phase += q[i] * static_cast<double>(t.wave[i]);
      phase = phase * kTwoPi;
      s += t.amplitude * (t.kind == Trig::Cos ? cos(phase) : sin(phase));
    }
    return s;
  }

  template <class T>
  std::array<T, kMaxDim> gradient(const std::array<T, kMaxDim>& q, int n) const {
    using std::cos;
    using std::sin;
    std::array<T, kMaxDim> g{T(0.0), T(0.0), T(0.0)};
    for (const auto& t : terms) {
      if (t.kind == Trig::One) continue;
      T phase(0.0);
      for (int i = 0; i < n; ++i)
        if (t.wave[i] != 0) phase += q[i] * static_cast<double>(t.wave[i]);
      phase = phase * kTwoPi;
      const T dphase = t.kind == Trig::Cos ? -t.amplitude * sin(phase) : t.amplitude * cos(phase);
      for (int i = 0; i < n; ++i)
        if (t.wave[i] != 0) g[i] += dphase * (kTwoPi * t.wave[i]);
    }
    return g;
  }
};

}  // namespace contactlab
