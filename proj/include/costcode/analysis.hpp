#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "costcode/codec.hpp"
#include "costcode/cost_model.hpp"
#include "costcode/sources.hpp"

namespace costcode {

enum class ThresholdCase { iid, mixed_I, mixed_II, mixed_III, mixed_step };
std::string_view to_string(ThresholdCase c);

struct ThresholdResult {
  enum class Kind { first_order, second_order };
  Kind kind = Kind::first_order;
  double value = 0.0;            // R(eps|X) or L(eps,a|X), in cost units
  ThresholdCase case_label = ThresholdCase::iid;
  double residual = 0.0;         // |G(value) - eps| of the root solve; 0 for closed forms
  bool root_solved = false;

  // Echoed inputs. For mixtures, component 1 is the higher-entropy one.
  double eps = 0.0;
  double a = 0.0;
  double alpha_c = 0.0;
  std::vector<double> entropies;
  std::vector<double> sigmas;
  std::vector<double> weights;
  bool swapped = false;          // components reordered so that H1 >= H2
};

// Infimum of eps-achievable first-order overflow thresholds R(eps|X).
ThresholdResult first_order_threshold(const Source& source, const CostModel& model, double eps);

// First-order centre a at which the second-order threshold is meaningful
// for this (source, eps): H/alpha_c for i.i.d.; H1/alpha_c (cases I, II) or
// H2/alpha_c (case III) for mixtures.
double admissible_center(const Source& source, const CostModel& model, double eps);

// Infimum of (eps, a)-achievable second-order thresholds L(eps, a|X).
// `a` defaults to admissible_center and must match it when given.
ThresholdResult second_order_threshold(const Source& source, const CostModel& model, double eps,
                                       std::optional<double> a = std::nullopt);

std::string to_json(const ThresholdResult& result);

// Fixed-length code (n, M_n, eps_n^f) given by its correctly decoded set T_n.
struct FixedLengthCode {
  std::size_t n = 0;
  std::vector<Sequence> members;   // T_n, lexicographic
  std::size_t M = 0;               // |T_n|
  double error_probability = 0.0;  // P(T_n^c)
};

// T_n = { x : c(phi(x)) <= eta_n }.
FixedLengthCode vl_to_fl(const PrefixCode& code, double eta);

struct FlagCode {
  PrefixCode code;
  Symbol flag = 0;                 // prefix marking members of T_n
  Symbol escape = 1;               // prefix marking the complement
  double certificate = 0.0;        // every x in T_n costs at most this much
};

// Variable-length code from a fixed-length one: flag symbol + interval code
// for the uniform law on T_n; escape symbol + interval code for the rest.
// certificate = (log_K M)/alpha_c + (log_K 2)/alpha_c + 2 c_max + c(flag) + c_max.
FlagCode fl_to_vl(const FixedLengthCode& fl, const SequenceDist& dist, const CostModel& model,
                  const BuildOptions& options = {});

enum class BoundMethod { exact, monte_carlo };

struct LemmaBounds {
  double lower_raw = 0.0;   // Pr{ P(X^n) <= z K^{-alpha_c eta} } - z
  double upper_raw = 0.0;   // Pr{ z P(X^n) <= K^{-alpha_c (eta - c_max)} } + z K^{alpha_c c_max + 1}
  double lower = 0.0;       // clamped to [0, 1]
  double upper = 0.0;
  double lower_stderr = 0.0;
  double upper_stderr = 0.0;
};

// Converse (any prefix code) and achievability (interval code) bounds on
// the overflow probability at eta_n. The achievability side is shifted by
// c_max to absorb the extra level the certified construction may add.
LemmaBounds lemma_bounds(const Source& source, const CostModel& model, std::size_t n, double eta,
                         double z, BoundMethod method = BoundMethod::exact,
                         std::size_t samples = 100000, std::uint64_t seed = 0,
                         unsigned workers = 0);

// Same quantities from an already enumerated support.
LemmaBounds lemma_bounds(const SequenceDist& dist, const CostModel& model, double alpha_c,
                         double eta, double z);

} // namespace costcode
