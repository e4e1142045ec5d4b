#pragma once

#include <mpfr.h>

#include <utility>

namespace costcode::detail {

// Owning handle for an mpfr_t. Arithmetic goes through the mpfr_* calls with
// an explicit rounding mode at each call site.
class BigFloat {
public:
  explicit BigFloat(mpfr_prec_t prec) { mpfr_init2(v_, prec); mpfr_set_zero(v_, 1); }
  BigFloat(mpfr_prec_t prec, double value) { mpfr_init2(v_, prec); mpfr_set_d(v_, value, MPFR_RNDN); }
  BigFloat(const BigFloat& other) {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }
  BigFloat& operator=(const BigFloat& other) {
    if (this != &other) {
      mpfr_set_prec(v_, mpfr_get_prec(other.v_));
      mpfr_set(v_, other.v_, MPFR_RNDN);
    }
    return *this;
  }
  BigFloat(BigFloat&& other) noexcept {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_swap(v_, other.v_);
  }
  BigFloat& operator=(BigFloat&& other) noexcept {
    mpfr_swap(v_, other.v_);
    return *this;
  }
  ~BigFloat() { mpfr_clear(v_); }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

private:
  mpfr_t v_;
};

// Root of sum_u K^{-alpha c(u)} = 1 to the full working precision, seeded by
// a double-precision estimate.
BigFloat cost_capacity_mp(unsigned long K, const double* costs, std::size_t count,
                          double estimate, mpfr_prec_t prec);

} // namespace costcode::detail
