#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "costcode/types.hpp"

namespace costcode {

// Costed code alphabet {0, ..., K-1}. Each symbol u carries a cost c(u) in
// (0, inf). An optional conditional table gives context-dependent costs
// c(u | context), where a context is the string of preceding code symbols
// (at most `max_context_depth` of them, written as digits).
class CostModel {
public:
  static constexpr std::size_t kDefaultContextDepth = 1;

  CostModel(std::size_t K, std::vector<double> costs,
            std::map<std::string, std::vector<double>> conditional = {},
            std::size_t max_context_depth = kDefaultContextDepth);

  std::size_t K() const { return K_; }
  const std::vector<double>& costs() const { return costs_; }
  const std::map<std::string, std::vector<double>>& conditional() const { return conditional_; }
  bool has_conditional() const { return !conditional_.empty(); }
  std::size_t max_context_depth() const { return max_context_depth_; }

  // Maximum over base and all conditional costs.
  double c_max() const { return c_max_; }
  // Cheapest base symbol (lowest index on ties).
  Symbol cheapest_symbol() const;

  // Cost row in effect after `history`: the longest suffix of the history
  // (up to max_context_depth) present in the conditional table, else the
  // base costs.
  const std::vector<double>& row_for(std::span<const Symbol> history) const;

  // Additive cost of a code string, c(u_1..u_l) = sum_i c(u_i | u_1..u_{i-1}).
  double cost(std::span<const Symbol> codeword) const;

private:
  std::size_t K_;
  std::vector<double> costs_;
  std::map<std::string, std::vector<double>> conditional_;
  std::size_t max_context_depth_;
  double c_max_ = 0.0;
};

struct CostCapacity {
  double alpha_c = 0.0;
  double residual = 0.0;                 // sum_u K^{-alpha_c c(u)} - 1
  std::pair<double, double> bracket{};   // final bisection bracket
};

// Unique positive root of sum_u K^{-alpha c(u)} = 1 for the base cost row.
CostCapacity solve_cost_capacity(const CostModel& model);

// Same root for an explicit cost row over a K-ary alphabet.
CostCapacity solve_cost_capacity(std::size_t K, std::span<const double> costs);

// q(u) = K^{-alpha_c c(u)}; sums to one.
std::vector<double> symbol_measure(const CostModel& model, const CostCapacity& cap);

// Solves the capacity of every context row (and the base row) and returns
// the common value. Throws ConfigError("non-constant conditional capacity ...")
// naming each offending context when the rows disagree by more than 1e-9.
CostCapacity validate_conditional_model(const CostModel& model);

// Per-row capacities, "(base)" denoting the base row.
std::map<std::string, double> row_capacities(const CostModel& model);

} // namespace costcode
