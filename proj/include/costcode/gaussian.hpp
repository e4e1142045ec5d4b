#pragma once

namespace costcode {

// Standard normal CDF.
double gaussian_cdf(double u);

// Inverse of gaussian_cdf on (0, 1), by monotone bisection.
double gaussian_quantile(double p);

} // namespace costcode
