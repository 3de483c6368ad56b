#pragma once

// Spectral invariants of integer matrices and word growth under
// automorphisms of abelian and free groups.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "contactlab/int_matrix.hpp"
#include "contactlab/polynomial.hpp"
#include "contactlab/stats.hpp"

namespace contactlab {

/// s(M) above this value means M is hyperbolic.
inline constexpr double kHyperbolicEps = 1e-8;

template <class Z>
std::vector<double> eigen_moduli(const BasicIntMatrix<Z>& m) {
  std::vector<double> out;
  for (const auto& r : roots(characteristic_polynomial(m))) out.push_back(std::abs(r));
  std::sort(out.begin(), out.end());
  return out;
}

/// max |log |c|| over the complex eigenvalues c of M.
template <class Z>
double s_value(const BasicIntMatrix<Z>& m) {
  double s = 0.0;
  for (double r : eigen_moduli(m)) s = std::max(s, std::abs(std::log(r)));
  return s;
}

template <class Z>
bool is_hyperbolic(const BasicIntMatrix<Z>& m) {
  return s_value(m) > kHyperbolicEps;
}

struct Periodicity {
  bool periodic = false;
  std::optional<int> order;
};

/// Decides whether M^m = id for some m >= 1. The characteristic polynomial
/// is divided by cyclotomic factors; if it splits completely, the candidate
/// order is the lcm of their indices and is confirmed by exact powering.
template <class Z>
Periodicity is_periodic(const BasicIntMatrix<Z>& m) {
  if (!m.is_unimodular()) throw Error("is_periodic requires |det M| = 1");
  const int n = m.size();
  IntPoly rest = characteristic_polynomial(m);
  int order = 1;
  for (int k = 1; degree(rest) > 0 && k <= 64; ++k) {
    if (euler_phi(k) > n) continue;
    const IntPoly phi = cyclotomic(k);
    bool used = false;
    while (degree(rest) >= degree(phi)) {
      auto [q, r] = divide_monic(rest, phi);
      if (!is_zero(r)) break;
      rest = std::move(q);
      used = true;
    }
    if (used) order = std::lcm(order, k);
  }
  if (degree(rest) > 0) return {false, std::nullopt};
  const BigMatrix big = BigMatrix::convert(m);
  if (big.pow(static_cast<unsigned>(order)).is_identity()) return {true, order};
  return {false, std::nullopt};
}

/// Decomposition of a 3x3 cohomology action of P+T*T^2 in the basis
/// ([dtheta], [dq1], [dq2]): I[dq1] = alpha[dq1] + beta[dq2] + l[dtheta],
/// I[dq2] = gamma[dq1] + delta[dq2] + m[dtheta], and
/// block = [[alpha, gamma], [beta, delta]].
struct ABlock {
  IntMatrix block;
  std::int64_t l = 0;
  std::int64_t m = 0;
  std::int64_t theta_sign = 1;  ///< I[dtheta] = theta_sign [dtheta]
};

inline ABlock a_block(const IntMatrix& i) {
  if (i.size() != 3) throw Error("a_block expects a 3x3 matrix");
  if (i(1, 0) != 0 || i(2, 0) != 0 || (i(0, 0) != 1 && i(0, 0) != -1))
    throw Error("I(V) != V: not representable by a contactomorphism");
  ABlock out;
  out.theta_sign = i(0, 0);
  out.l = i(0, 1);
  out.m = i(0, 2);
  out.block = IntMatrix(2, {i(1, 1), i(1, 2), i(2, 1), i(2, 2)});
  return out;
}

/// Natural log of a positive big integer.
inline double log_big(const BigInt& x) {
  if (x <= 0) throw Error("log of non-positive integer");
  const unsigned bits = boost::multiprecision::msb(x);
  if (bits < 1000) return std::log(static_cast<double>(x));
  const unsigned shift = bits - 60;
  return std::log(static_cast<double>(BigInt(x >> shift))) + shift * std::log(2.0);
}

struct GrowthTable {
  std::vector<int> step;
  std::vector<std::string> length;  ///< exact decimal lengths
  std::vector<double> log_length;
  double rate = 0.0;  ///< last-half regression slope of log_length
};

/// Lengths |M^k gamma|_1 for k = 0..steps in exact arithmetic.
template <class Z>
GrowthTable abelian_growth_table(const BasicIntMatrix<Z>& m, const std::vector<std::int64_t>& gamma, int steps) {
  if (static_cast<int>(gamma.size()) != m.size()) throw Error("class vector size does not match matrix");
  const BigMatrix big = BigMatrix::convert(m);
  std::vector<BigInt> v(gamma.begin(), gamma.end());
  GrowthTable t;
  for (int k = 0; k <= steps; ++k) {
    BigInt l1 = 0;
    for (const auto& x : v) l1 += abs(x);
    if (l1 == 0) throw Error("trivial class");
    t.step.push_back(k);
    t.length.push_back(l1.str());
    t.log_length.push_back(log_big(l1));
    v = big * v;
  }
  t.rate = last_half_fit(t.log_length).slope;
  return t;
}

/// Growth rate of |M^k gamma|_1 under forward iteration, maximized over the
/// sample classes.
template <class Z>
double abelian_growth(const BasicIntMatrix<Z>& m, const std::vector<std::vector<std::int64_t>>& samples, int steps) {
  if (samples.empty()) throw Error("abelian growth needs at least one sample class");
  if (steps < 10) throw Error("abelian growth needs N >= 10");
  double best = 0.0;
  for (const auto& g : samples) best = std::max(best, abelian_growth_table(m, g, steps).rate);
  return best;
}

/// Conjugacy-class growth of Z^n under M, taken over both time directions
/// (M and M^-1). Forward growth alone is log rho(M), which is below s(M)
/// whenever rho(M^-1) > rho(M).
inline double abelian_bar_s(const IntMatrix& m, const std::vector<std::vector<std::int64_t>>& samples, int steps) {
  return std::max(abelian_growth(m, samples, steps), abelian_growth(m.inverse(), samples, steps));
}

// ---------------------------------------------------------------------------
// Free groups. Generator k (0-based) is letter k+1; its inverse is -(k+1).
// Text form: 'a'..'z' for generators, 'A'..'Z' for their inverses.

struct GroupWord {
  std::vector<int> letters;

  static GroupWord parse(const std::string& s) {
    GroupWord w;
    for (char c : s) {
      if (c >= 'a' && c <= 'z') w.letters.push_back(c - 'a' + 1);
      else if (c >= 'A' && c <= 'Z') w.letters.push_back(-(c - 'A' + 1));
      else if (c == '1' || c == ' ') continue;  // '1' denotes the empty word
      else throw Error(std::string("invalid letter '") + c + "' in group word");
    }
    return w;
  }

  std::string str() const {
    std::string s;
    for (int l : letters) s += l > 0 ? static_cast<char>('a' + l - 1) : static_cast<char>('A' - l - 1);
    return s;
  }

  std::size_t length() const { return letters.size(); }
  bool empty() const { return letters.empty(); }
  bool operator==(const GroupWord&) const = default;

  GroupWord inverse() const {
    GroupWord w;
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) w.letters.push_back(-*it);
    return w;
  }
};

inline GroupWord free_reduce(const GroupWord& w) {
  GroupWord r;
  for (int l : w.letters) {
    if (!r.letters.empty() && r.letters.back() == -l) r.letters.pop_back();
    else r.letters.push_back(l);
  }
  return r;
}

/// Freely reduce, then cancel matching first/last letters.
inline GroupWord cyclic_reduce(const GroupWord& w) {
  GroupWord r = free_reduce(w);
  std::size_t b = 0, e = r.letters.size();
  while (e - b >= 2 && r.letters[b] == -r.letters[e - 1]) {
    ++b;
    --e;
  }
  return GroupWord{std::vector<int>(r.letters.begin() + b, r.letters.begin() + e)};
}

/// Endomorphism of a free group given by generator images.
struct FreeAutomorphism {
  std::vector<GroupWord> images;

  GroupWord operator()(const GroupWord& w) const {
    GroupWord out;
    for (int l : w.letters) {
      const int g = std::abs(l) - 1;
      if (g >= static_cast<int>(images.size())) throw Error("word uses a generator without an image");
      const GroupWord& img = images[g];
      if (l > 0) out.letters.insert(out.letters.end(), img.letters.begin(), img.letters.end());
      else {
        const GroupWord inv = img.inverse();
        out.letters.insert(out.letters.end(), inv.letters.begin(), inv.letters.end());
      }
    }
    return free_reduce(out);
  }
};

inline constexpr std::size_t kDefaultWordCap = 1'000'000;

/// Iterates w -> cyclic_reduce(sigma(w)) up to `steps` times (stopping once
/// the length exceeds `cap`) and fits the growth rate of the log length.
inline GrowthTable free_growth_table(const FreeAutomorphism& sigma, const GroupWord& w, int steps,
                                     std::size_t cap = kDefaultWordCap) {
  if (steps < 5) throw Error("free growth needs N >= 5");
  GroupWord cur = cyclic_reduce(w);
  if (cur.empty()) throw Error("trivial class");
  GrowthTable t;
  for (int k = 0; k <= steps; ++k) {
    t.step.push_back(k);
    t.length.push_back(std::to_string(cur.length()));
    t.log_length.push_back(std::log(static_cast<double>(cur.length())));
    if (k == steps || cur.length() > cap) break;
    cur = cyclic_reduce(sigma(cur));
    if (cur.empty()) throw Error("trivial class");
  }
  t.rate = last_half_fit(t.log_length).slope;
  return t;
}

inline double free_growth(const FreeAutomorphism& sigma, const GroupWord& w, int steps,
                          std::size_t cap = kDefaultWordCap) {
  return free_growth_table(sigma, w, steps, cap).rate;
}

}  // namespace contactlab
