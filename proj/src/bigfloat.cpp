#include "bigfloat.hpp"

#include <algorithm>

#include "costcode/error.hpp"

namespace costcode::detail {

namespace {

// sum_u K^{-alpha c(u)} - 1, rounded to nearest.
int residual_sign(unsigned long K, const double* costs, std::size_t count, const BigFloat& alpha,
                  mpfr_prec_t prec) {
  BigFloat sum(prec + 32), base(prec + 32), expo(prec + 32), term(prec + 32);
  mpfr_set_ui(base.get(), K, MPFR_RNDN);
  for (std::size_t i = 0; i < count; ++i) {
    mpfr_mul_d(expo.get(), alpha.get(), -costs[i], MPFR_RNDN);
    mpfr_pow(term.get(), base.get(), expo.get(), MPFR_RNDN);
    mpfr_add(sum.get(), sum.get(), term.get(), MPFR_RNDN);
  }
  return mpfr_cmp_ui(sum.get(), 1);
}

} // namespace

BigFloat cost_capacity_mp(unsigned long K, const double* costs, std::size_t count,
                          double estimate, mpfr_prec_t prec) {
  BigFloat alpha(prec);
  if (std::all_of(costs, costs + count, [&](double c) { return c == costs[0]; })) {
    mpfr_set_d(alpha.get(), 1.0, MPFR_RNDN);
    mpfr_div_d(alpha.get(), alpha.get(), costs[0], MPFR_RNDN);
    return alpha;
  }
  BigFloat lo(prec, estimate * (1.0 - 1e-9)), hi(prec, estimate * (1.0 + 1e-9));
  for (int grow = 0; residual_sign(K, costs, count, lo, prec) <= 0; ++grow) {
    if (grow > 60) throw NumericError("high-precision capacity bracket failed");
    mpfr_mul_d(lo.get(), lo.get(), 0.5, MPFR_RNDN);
  }
  for (int grow = 0; residual_sign(K, costs, count, hi, prec) >= 0; ++grow) {
    if (grow > 60) throw NumericError("high-precision capacity bracket failed");
    mpfr_mul_d(hi.get(), hi.get(), 2.0, MPFR_RNDN);
  }
  BigFloat mid(prec);
  for (mpfr_prec_t it = 0; it < prec + 64; ++it) {
    mpfr_add(mid.get(), lo.get(), hi.get(), MPFR_RNDN);
    mpfr_div_2ui(mid.get(), mid.get(), 1, MPFR_RNDN);
    if (mpfr_equal_p(mid.get(), lo.get()) || mpfr_equal_p(mid.get(), hi.get())) break;
    const int s = residual_sign(K, costs, count, mid, prec);
    if (s == 0) return mid;
    if (s > 0) {
      mpfr_set(lo.get(), mid.get(), MPFR_RNDN);
    } else {
      mpfr_set(hi.get(), mid.get(), MPFR_RNDN);
    }
  }
  return lo;
}

} // namespace costcode::detail
