#pragma once

// Reference computations for the tests. None of these call into the library.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

using Real = long double;

// Root of sum_u K^{-alpha c(u)} = 1 by plain long-double bisection.
inline Real cost_capacity(int K, const std::vector<double>& costs) {
  auto f = [&](Real a) {
    Real s = 0;
    for (double c : costs) s += std::pow(static_cast<Real>(K), -a * c);
    return s - 1;
  };
  Real lo = 0, hi = 64;
  for (int i = 0; i < 200; ++i) {
    const Real mid = (lo + hi) / 2;
    (f(mid) > 0 ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

// Phi(u) = 1/2 + integral_0^u phi(t) dt, adaptive Simpson in long double.
inline Real simpson(Real a, Real b, Real fa, Real fm, Real fb, Real whole, Real tol, int depth) {
  auto pdf = [](Real t) { return std::exp(-t * t / 2) / std::sqrt(2 * 3.14159265358979323846264338L); };
  const Real m = (a + b) / 2, lm = (a + m) / 2, rm = (m + b) / 2;
  const Real flm = pdf(lm), frm = pdf(rm);
  const Real left = (m - a) / 6 * (fa + 4 * flm + fm);
  const Real right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15 * tol) {
    return left + right + (left + right - whole) / 15;
  }
  return simpson(a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson(m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

inline Real phi(Real u) {
  auto pdf = [](Real t) { return std::exp(-t * t / 2) / std::sqrt(2 * 3.14159265358979323846264338L); };
  const Real b = std::fabs(u);
  if (b == 0) return 0.5L;
  const Real fa = pdf(0), fb = pdf(b), fm = pdf(b / 2);
  const Real whole = b / 6 * (fa + 4 * fm + fb);
  const Real half = simpson(0, b, fa, fm, fb, whole, 1e-18L, 60);
  return u > 0 ? 0.5L + half : 0.5L - half;
}

// Phi^{-1}(p) by bisection on the quadrature above.
inline Real phi_inverse(Real p) {
  Real lo = -12, hi = 12;
  for (int i = 0; i < 120; ++i) {
    const Real mid = (lo + hi) / 2;
    (phi(mid) < p ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

inline Real log_k(Real x, int K) { return std::log(x) / std::log(static_cast<Real>(K)); }

inline Real entropy(const std::vector<double>& pmf, int K) {
  Real h = 0;
  for (double p : pmf) {
    if (p > 0) h -= p * log_k(p, K);
  }
  return h;
}

inline Real varentropy(const std::vector<double>& pmf, int K) {
  const Real h = entropy(pmf, K);
  Real v = 0;
  for (double p : pmf) {
    if (p > 0) v += p * (log_k(p, K) + h) * (log_k(p, K) + h);
  }
  return v;
}

// Brute-force product-form law: every length-n string over the alphabet,
// in counting order, with its probability under the mixture
// sum_i w_i prod_t pmf_i(x_t).
struct Block {
  std::vector<std::uint32_t> x;
  Real p;
};

inline std::vector<Block> all_blocks(const std::vector<std::vector<double>>& pmfs,
                                     const std::vector<double>& weights, std::size_t n) {
  const std::size_t A = pmfs.front().size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= A;
  std::vector<Block> out;
  for (std::size_t code = 0; code < total; ++code) {
    Block b{std::vector<std::uint32_t>(n), 0};
    std::size_t c = code;
    for (std::size_t i = n; i-- > 0;) {
      b.x[i] = static_cast<std::uint32_t>(c % A);
      c /= A;
    }
    for (std::size_t k = 0; k < pmfs.size(); ++k) {
      Real q = weights[k];
      for (auto s : b.x) q *= pmfs[k][s];
      b.p += q;
    }
    out.push_back(std::move(b));
  }
  return out;
}

} // namespace oracle
