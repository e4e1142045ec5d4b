#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "costcode/sources.hpp"

namespace costcode {

enum class SpectrumMethod { exact, dp, monte_carlo };

std::string_view to_string(SpectrumMethod method);
SpectrumMethod parse_spectrum_method(std::string_view name);

// Finite-n evaluation of the information spectrum.
//   first order:  Pr{ (1/(n alpha_c)) log_K 1/P(X^n) >= R }
//   second order: Pr{ (-log_K P(X^n) - n alpha_c a) / (sqrt(n) alpha_c) >= L }
struct SpectrumQuery {
  Source source;
  std::size_t n = 1;
  double alpha_c = 1.0;
  std::size_t K = 2;                  // logarithm base
  SpectrumMethod method = SpectrumMethod::exact;
  std::size_t samples = 100000;       // monte_carlo
  std::uint64_t seed = 0;             // monte_carlo
  std::vector<double> grid;           // ascending thresholds (R or L)
  double a = 0.0;                     // second-order center
  double lattice_step = 1e-4;         // dp
  unsigned workers = 0;
  std::size_t support_cap = kDefaultSupportCap;
};

struct SpectrumPoint {
  double threshold = 0.0;
  double probability = 0.0;
  // Monte Carlo: binomial standard error. dp: half-width of the rigorous
  // bracket [lower, upper]. exact: 0.
  double stderr_ = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct SpectrumCurve {
  SpectrumMethod method = SpectrumMethod::exact;
  std::vector<SpectrumPoint> points;
};

SpectrumCurve first_order_spectrum(const SpectrumQuery& query);
SpectrumCurve second_order_spectrum(const SpectrumQuery& query);

// CSV with header `threshold,probability,stderr,method`.
std::string to_csv(const SpectrumCurve& curve);

struct StrongConverseRow {
  std::size_t n = 0;
  double lower_quantile = 0.0;   // delta-quantile of (1/n) log_K 1/P(X^n)
  double upper_quantile = 0.0;   // (1-delta)-quantile
  double gap = 0.0;
};

struct StrongConverseReport {
  double delta = 0.0;
  std::vector<StrongConverseRow> rows;
  // |H(X1) - H(X2)| for mixtures, 0 for i.i.d. sources: where the gap should settle.
  double predicted_gap = 0.0;
  // "strong-converse consistent", "two-peak" or "inconclusive".
  std::string verdict;
};

// Empirical delta and (1-delta) quantiles of the normalized self-information
// for each n. A gap shrinking like 1/sqrt(n) means the spectral sup- and
// inf-entropy rates coincide; a gap that stays put means they do not.
StrongConverseReport strong_converse_diagnostic(const Source& source,
                                                std::span<const std::size_t> n_list,
                                                double delta, std::size_t K,
                                                std::size_t samples, std::uint64_t seed,
                                                unsigned workers = 0);

} // namespace costcode
