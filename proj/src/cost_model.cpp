#include "costcode/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "costcode/error.hpp"

namespace costcode {

namespace {

constexpr double kResidualTol = 1e-13;
constexpr double kBracketTol = 1e-14;
constexpr double kConditionalAgreement = 1e-9;

void check_row(std::size_t K, std::span<const double> row, const std::string& where) {
  if (row.size() != K) {
    throw ConfigError(where + ": expected " + std::to_string(K) + " costs, got " +
                      std::to_string(row.size()));
  }
  for (double c : row) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw ConfigError(where + ": costs must be positive and finite");
    }
  }
}

double kraft_residual(std::size_t K, std::span<const double> costs, double alpha) {
  const double logK = std::log(static_cast<double>(K));
  double sum = 0.0;
  for (double c : costs) sum += std::exp(-alpha * c * logK);
  return sum - 1.0;
}

} // namespace

std::string to_string(const std::vector<Symbol>& s, std::size_t alphabet_size) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (alphabet_size > 10 && i > 0) out += '.';
    out += std::to_string(s[i]);
  }
  // A lone multi-digit symbol keeps a trailing dot so it is not read as digits.
  if (alphabet_size > 10 && s.size() == 1) out += '.';
  return out;
}

std::vector<Symbol> parse_symbols(const std::string& text) {
  std::vector<Symbol> out;
  if (text.find('.') != std::string::npos) {
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, '.')) {
      if (tok.empty() || !std::all_of(tok.begin(), tok.end(), ::isdigit)) {
        throw ConfigError("malformed symbol string '" + text + "'");
      }
      out.push_back(static_cast<Symbol>(std::stoul(tok)));
    }
    return out;
  }
  for (char ch : text) {
    if (ch < '0' || ch > '9') throw ConfigError("malformed symbol string '" + text + "'");
    out.push_back(static_cast<Symbol>(ch - '0'));
  }
  return out;
}

CostModel::CostModel(std::size_t K, std::vector<double> costs,
                     std::map<std::string, std::vector<double>> conditional,
                     std::size_t max_context_depth)
    : K_(K), costs_(std::move(costs)), conditional_(std::move(conditional)),
      max_context_depth_(max_context_depth) {
  if (K_ < 2) throw ConfigError("code alphabet size K must be at least 2");
  check_row(K_, costs_, "costs");
  c_max_ = *std::max_element(costs_.begin(), costs_.end());
  for (const auto& [context, row] : conditional_) {
    const auto symbols = context.empty() ? std::vector<Symbol>{} : parse_symbols(context);
    if (symbols.size() > max_context_depth_) {
      throw ConfigError("context '" + context + "' deeper than max context depth " +
                        std::to_string(max_context_depth_));
    }
    for (Symbol u : symbols) {
      if (u >= K_) throw ConfigError("context '" + context + "' uses a symbol outside 0..K-1");
    }
    check_row(K_, row, "conditional row '" + context + "'");
    c_max_ = std::max(c_max_, *std::max_element(row.begin(), row.end()));
  }
}

Symbol CostModel::cheapest_symbol() const {
  return static_cast<Symbol>(std::min_element(costs_.begin(), costs_.end()) - costs_.begin());
}

const std::vector<double>& CostModel::row_for(std::span<const Symbol> history) const {
  if (conditional_.empty()) return costs_;
  const std::size_t depth = std::min(history.size(), max_context_depth_);
  for (std::size_t len = depth + 1; len-- > 0;) {
    std::vector<Symbol> suffix(history.end() - static_cast<std::ptrdiff_t>(len), history.end());
    auto it = conditional_.find(to_string(suffix, K_));
    if (it != conditional_.end()) return it->second;
  }
  return costs_;
}

double CostModel::cost(std::span<const Symbol> codeword) const {
  double total = 0.0;
  for (std::size_t i = 0; i < codeword.size(); ++i) {
    if (codeword[i] >= K_) throw ConfigError("code symbol outside 0..K-1");
    total += row_for(codeword.first(i))[codeword[i]];
  }
  return total;
}

CostCapacity solve_cost_capacity(std::size_t K, std::span<const double> costs) {
  if (K < 2) throw ConfigError("code alphabet size K must be at least 2");
  check_row(K, costs, "costs");

  // Equal costs c admit the closed form K * K^{-alpha c} = 1  =>  alpha = 1/c.
  if (std::all_of(costs.begin(), costs.end(), [&](double c) { return c == costs[0]; })) {
    const double alpha = 1.0 / costs[0];
    return {alpha, kraft_residual(K, costs, alpha), {alpha, alpha}};
  }

  // The residual is strictly decreasing in alpha: positive near 0, negative for large alpha.
  double lo = 1e-9;
  double hi = 1.0;
  while (kraft_residual(K, costs, hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericError("cost capacity bracket diverged");
  }
  double f_lo = kraft_residual(K, costs, lo);
  double f_hi = kraft_residual(K, costs, hi);
  while (hi - lo > kBracketTol * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f = kraft_residual(K, costs, mid);
    if (f == 0.0) {
      lo = hi = mid;
      f_lo = f_hi = 0.0;
      break;
    }
    if (f > 0.0) {
      lo = mid;
      f_lo = f;
    } else {
      hi = mid;
      f_hi = f;
    }
  }
  const bool take_lo = std::abs(f_lo) <= std::abs(f_hi);
  CostCapacity cap{take_lo ? lo : hi, take_lo ? f_lo : f_hi, {lo, hi}};
  if (std::abs(cap.residual) > kResidualTol * 10) {
    throw NumericError("cost capacity residual " + std::to_string(cap.residual) +
                       " above tolerance");
  }
  return cap;
}

CostCapacity solve_cost_capacity(const CostModel& model) {
  return solve_cost_capacity(model.K(), model.costs());
}

std::vector<double> symbol_measure(const CostModel& model, const CostCapacity& cap) {
  const double logK = std::log(static_cast<double>(model.K()));
  std::vector<double> q;
  q.reserve(model.K());
  for (double c : model.costs()) q.push_back(std::exp(-cap.alpha_c * c * logK));
  return q;
}

std::map<std::string, double> row_capacities(const CostModel& model) {
  std::map<std::string, double> out;
  out["(base)"] = solve_cost_capacity(model).alpha_c;
  for (const auto& [context, row] : model.conditional()) {
    out[context] = solve_cost_capacity(model.K(), row).alpha_c;
  }
  return out;
}

CostCapacity validate_conditional_model(const CostModel& model) {
  if (!model.has_conditional()) throw ConfigError("cost model has no conditional table");
  const CostCapacity base = solve_cost_capacity(model);
  std::ostringstream offending;
  offending.precision(10);
  bool ok = true;
  for (const auto& [context, row] : model.conditional()) {
    const double alpha = solve_cost_capacity(model.K(), row).alpha_c;
    if (std::abs(alpha - base.alpha_c) > kConditionalAgreement) {
      ok = false;
      offending << " '" << context << "'=" << alpha;
    }
  }
  if (!ok) {
    std::ostringstream msg;
    msg.precision(10);
    msg << "non-constant conditional capacity: base row " << base.alpha_c << ", contexts"
        << offending.str();
    throw ConfigError(msg.str());
  }
  return base;
}

} // namespace costcode
