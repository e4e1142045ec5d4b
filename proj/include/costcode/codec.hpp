#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "costcode/cost_model.hpp"
#include "costcode/sources.hpp"
#include "costcode/types.hpp"

namespace costcode {

struct CodeEntry {
  Sequence sequence;
  Codeword codeword;
  double probability = 0.0;
  double cost = 0.0;   // filled in by PrefixCode from the cost model
};

// Explicit block code phi_n with its inverse. Construction rejects tables
// that are not prefix-free or that map two blocks to one codeword.
class PrefixCode {
public:
  PrefixCode(std::size_t n, CostModel model, double alpha_c, std::vector<CodeEntry> entries);

  std::size_t n() const { return n_; }
  const CostModel& model() const { return model_; }
  double alpha_c() const { return alpha_c_; }
  const std::vector<CodeEntry>& entries() const { return entries_; }

  const Codeword& encode(std::span<const Symbol> x) const;
  // Exactly one codeword; truncated, overlong or unknown strings throw.
  Sequence decode(std::span<const Symbol> w) const;

  double min_cost() const;
  double max_cost() const;

private:
  struct TrieNode {
    std::vector<std::int32_t> child;
    std::int32_t entry = -1;
  };

  std::size_t n_;
  CostModel model_;
  double alpha_c_;
  std::vector<CodeEntry> entries_;
  std::map<Sequence, std::size_t> index_;
  std::vector<TrieNode> trie_;
};

// Cost-weighted Kraft sum: sum_x K^{-alpha_c c(phi(x))}.
double kraft_sum(const PrefixCode& code);

// Per-block certified bound for build_exact_code:
// (-log_K P + log_K 2) / alpha_c + 2 c_max.
double certified_cost_bound(double probability, double alpha_c, double c_max, std::size_t K);

// Tighter bound -log_K P / alpha_c + log_K 2 / alpha_c + c_max that the ideal
// (exact-arithmetic) interval code meets.
double ideal_cost_bound(double probability, double alpha_c, double c_max, std::size_t K);

unsigned default_precision_bits();   // COSTCODE_PRECISION or 192

struct BuildOptions {
  unsigned precision_bits = default_precision_bits();
  unsigned max_precision_bits = 4096;
};

struct BuildReport {
  unsigned precision_bits_used = 0;
  double ideal_bound_fraction = 0.0;   // share of blocks meeting ideal_cost_bound
};

// Interval code over the costed alphabet. Blocks are laid out in
// lexicographic order as [F(x), F(x)+P(x)); the code tree splits every node
// in proportion to q(u) = K^{-alpha_c c(u)}. Each block descends towards its
// midpoint and stops at the first node whose certified width is at most
// P(x)/2, after its containment in the block interval has been certified.
// Node bounds use directed rounding; if certification fails the build is
// repeated at twice the precision, up to max_precision_bits (NumericError).
PrefixCode build_exact_code(const SequenceDist& dist, const CostModel& model,
                            const BuildOptions& options = {}, BuildReport* report = nullptr);

// Random complete K-ary tree with at least |support| leaves, leaves assigned
// injectively to blocks at random.
PrefixCode random_prefix_code(const SequenceDist& dist, const CostModel& model, double alpha_c,
                              std::uint64_t seed);

// `sequence,codeword,cost`
std::string to_csv(const PrefixCode& code);
// Reads a table written by to_csv; probabilities are left at zero.
PrefixCode code_from_csv(std::string_view csv, const CostModel& model, double alpha_c);

enum class OverflowMethod { exact, monte_carlo, surrogate_mc };
std::string_view to_string(OverflowMethod method);
OverflowMethod parse_overflow_method(std::string_view name);

// Threshold family: eta_n = nR, eta_n = na + L sqrt(n), or a raw eta_n.
struct OverflowThreshold {
  enum class Kind { first_order, second_order, raw };
  Kind kind = Kind::raw;
  double R = 0.0;
  double a = 0.0;
  double L = 0.0;
  double eta = 0.0;

  static OverflowThreshold first_order(double R);
  static OverflowThreshold second_order(double a, double L);
  static OverflowThreshold raw(double eta);

  double eta_for(std::size_t n) const;
};

struct OverflowQuery {
  std::size_t n = 1;
  OverflowThreshold threshold;
  OverflowMethod method = OverflowMethod::exact;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  unsigned workers = 0;
};

struct OverflowResult {
  double eta = 0.0;
  double probability = 0.0;
  double stderr_ = 0.0;
  OverflowMethod method = OverflowMethod::exact;
  // True for surrogate-mc: an upper bound on the built code's overflow.
  bool surrogate_upper_bound = false;
};

// Pr{ c(phi(X^n)) > eta_n } for a concrete table: exact sum, or Monte Carlo
// sampling blocks by their table probabilities.
OverflowResult overflow(const PrefixCode& code, const OverflowQuery& query);

// Table-free evaluation for large n: Pr{ b(X^n) > eta_n } with b the
// certified_cost_bound. Only surrogate-mc is accepted here.
OverflowResult overflow(const Source& source, const CostModel& model, double alpha_c,
                        const OverflowQuery& query);

// `eta,probability,stderr,method`
std::string to_csv(const std::vector<OverflowResult>& results);

} // namespace costcode
