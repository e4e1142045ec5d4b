#include "costcode/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "costcode/error.hpp"

namespace costcode {

// erfc keeps full relative accuracy in the lower tail, so Phi(-u) and
// 1 - Phi(u) agree to rounding.
double gaussian_cdf(double u) {
  if (std::isnan(u)) return u;
  return 0.5 * std::erfc(-u / std::numbers::sqrt2);
}

namespace {

// Bisection for p <= 0.5, where p carries its full precision.
double lower_quantile(double p) {
  double lo = -40.0;
  double hi = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (gaussian_cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(gaussian_cdf(lo) - p) < std::abs(gaussian_cdf(hi) - p) ? lo : hi;
}

} // namespace

double gaussian_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("gaussian_quantile: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return lower_quantile(p);
  return -lower_quantile(1.0 - p);
}

} // namespace costcode
