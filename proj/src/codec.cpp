#include "costcode/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "bigfloat.hpp"
#include "costcode/error.hpp"
#include "costcode/random.hpp"
#include "costcode/format.hpp"

namespace costcode {

using detail::BigFloat;

// ---------------------------------------------------------------------------
// PrefixCode

PrefixCode::PrefixCode(std::size_t n, CostModel model, double alpha_c,
                       std::vector<CodeEntry> entries)
    : n_(n), model_(std::move(model)), alpha_c_(alpha_c), entries_(std::move(entries)) {
  if (entries_.empty()) throw ConfigError("prefix code needs a nonempty support");
  const std::size_t K = model_.K();
  trie_.push_back({std::vector<std::int32_t>(K, -1), -1});
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto& e = entries_[i];
    if (e.codeword.empty()) throw ConfigError("empty codeword");
    if (!index_.emplace(e.sequence, i).second) {
      throw ConfigError("duplicate block " + to_string(e.sequence));
    }
    e.cost = model_.cost(e.codeword);
    std::size_t node = 0;
    for (Symbol u : e.codeword) {
      if (trie_[node].entry >= 0) {
        throw ConfigError("not prefix-free: codeword of " +
                          to_string(entries_[static_cast<std::size_t>(trie_[node].entry)].sequence) +
                          " is a prefix of the codeword of " + to_string(e.sequence));
      }
      if (trie_[node].child[u] < 0) {
        trie_[node].child[u] = static_cast<std::int32_t>(trie_.size());
        trie_.push_back({std::vector<std::int32_t>(K, -1), -1});
      }
      node = static_cast<std::size_t>(trie_[node].child[u]);
    }
    const bool has_children = std::any_of(trie_[node].child.begin(), trie_[node].child.end(),
                                          [](std::int32_t c) { return c >= 0; });
    if (trie_[node].entry >= 0 || has_children) {
      throw ConfigError("not prefix-free at the codeword of " + to_string(e.sequence));
    }
    trie_[node].entry = static_cast<std::int32_t>(i);
  }
}

const Codeword& PrefixCode::encode(std::span<const Symbol> x) const {
  const auto it = index_.find(Sequence(x.begin(), x.end()));
  if (it == index_.end()) {
    throw ConfigError("block " + to_string(Sequence(x.begin(), x.end())) + " is not in the code");
  }
  return entries_[it->second].codeword;
}

Sequence PrefixCode::decode(std::span<const Symbol> w) const {
  std::size_t node = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] >= model_.K()) throw ConfigError("code symbol outside 0..K-1");
    const std::int32_t next = trie_[node].child[w[i]];
    if (next < 0) throw ConfigError("unknown code string");
    node = static_cast<std::size_t>(next);
    if (trie_[node].entry >= 0) {
      if (i + 1 != w.size()) throw ConfigError("dangling symbols after a complete codeword");
      return entries_[static_cast<std::size_t>(trie_[node].entry)].sequence;
    }
  }
  throw ConfigError("truncated codeword");
}

double PrefixCode::min_cost() const {
  return std::min_element(entries_.begin(), entries_.end(),
                          [](const auto& a, const auto& b) { return a.cost < b.cost; })
      ->cost;
}

double PrefixCode::max_cost() const {
  return std::max_element(entries_.begin(), entries_.end(),
                          [](const auto& a, const auto& b) { return a.cost < b.cost; })
      ->cost;
}

double kraft_sum(const PrefixCode& code) {
  const double logK = std::log(static_cast<double>(code.model().K()));
  double sum = 0.0;
  for (const auto& e : code.entries()) sum += std::exp(-code.alpha_c() * e.cost * logK);
  return sum;
}

double certified_cost_bound(double probability, double alpha_c, double c_max, std::size_t K) {
  const double base = static_cast<double>(K);
  return (-log_base(probability, base) + log_base(2.0, base)) / alpha_c + 2.0 * c_max;
}

double ideal_cost_bound(double probability, double alpha_c, double c_max, std::size_t K) {
  const double base = static_cast<double>(K);
  return (-log_base(probability, base) + log_base(2.0, base)) / alpha_c + c_max;
}

unsigned default_precision_bits() {
  if (const char* env = std::getenv("COSTCODE_PRECISION")) {
    char* end = nullptr;
    const unsigned long bits = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && bits >= 64 && bits <= 65536) {
      return static_cast<unsigned>(bits);
    }
  }
  return 192;
}

// ---------------------------------------------------------------------------
// Interval construction

namespace {

constexpr std::size_t kMaxDepth = 100000;

// Split points 0 = Q_0 < Q_1 < ... < Q_K = 1 of the code tree. The tree is
// defined by these stored values; q~_j = Q_{j+1} - Q_j is carried as an
// enclosure [q_lo, q_hi].
struct SplitTable {
  std::vector<BigFloat> Q;
  std::vector<BigFloat> q_lo;
  std::vector<BigFloat> q_hi;
};

SplitTable make_split_table(const CostModel& model, double alpha_estimate, mpfr_prec_t prec) {
  const std::size_t K = model.K();
  const auto& costs = model.costs();
  const BigFloat alpha =
      detail::cost_capacity_mp(K, costs.data(), costs.size(), alpha_estimate, prec);

  SplitTable t;
  BigFloat base(prec), expo(prec), term(prec);
  mpfr_set_ui(base.get(), K, MPFR_RNDN);
  t.Q.emplace_back(prec, 0.0);
  for (std::size_t j = 0; j + 1 < K; ++j) {
    mpfr_mul_d(expo.get(), alpha.get(), -costs[j], MPFR_RNDN);
    mpfr_pow(term.get(), base.get(), expo.get(), MPFR_RNDN);
    BigFloat next(prec);
    mpfr_add(next.get(), t.Q.back().get(), term.get(), MPFR_RNDN);
    t.Q.push_back(std::move(next));
  }
  t.Q.emplace_back(prec, 1.0);
  for (std::size_t j = 0; j < K; ++j) {
    if (mpfr_cmp(t.Q[j].get(), t.Q[j + 1].get()) >= 0) {
      throw NumericError("code tree split points are not increasing at this precision");
    }
    BigFloat lo(prec), hi(prec);
    mpfr_sub(lo.get(), t.Q[j + 1].get(), t.Q[j].get(), MPFR_RNDD);
    mpfr_sub(hi.get(), t.Q[j + 1].get(), t.Q[j].get(), MPFR_RNDU);
    t.q_lo.push_back(std::move(lo));
    t.q_hi.push_back(std::move(hi));
  }
  return t;
}

// Enclosure of a code-tree node [lo, lo + W).
struct NodeBounds {
  BigFloat lo_lo, lo_hi, w_lo, w_hi;
  explicit NodeBounds(mpfr_prec_t prec)
      : lo_lo(prec, 0.0), lo_hi(prec, 0.0), w_lo(prec, 1.0), w_hi(prec, 1.0) {}
};

// Codeword for the block interval [F, F+P), F known as [f_lo, f_hi].
// Returns nullopt when the stopping node cannot be certified at this precision.
std::optional<Codeword> descend(const SplitTable& split, std::size_t K, const BigFloat& f_lo,
                                const BigFloat& f_hi, double probability, mpfr_prec_t prec) {
  const double half = probability / 2.0;
  BigFloat m_lo(prec), m_hi(prec), end_lo(prec), tmp(prec), b_hi(prec);
  mpfr_add_d(m_lo.get(), f_lo.get(), half, MPFR_RNDD);
  mpfr_add_d(m_hi.get(), f_hi.get(), half, MPFR_RNDU);
  mpfr_add_d(end_lo.get(), f_lo.get(), probability, MPFR_RNDD);

  NodeBounds node(prec);
  Codeword path;
  std::optional<std::size_t> stop_depth;
  for (std::size_t depth = 1; depth <= kMaxDepth; ++depth) {
    // Highest child whose left boundary is certainly <= the midpoint;
    // ambiguous boundaries send the descent to the lower child.
    std::size_t j = 0;
    for (std::size_t k = 1; k < K; ++k) {
      mpfr_mul(b_hi.get(), node.w_hi.get(), split.Q[k].get(), MPFR_RNDU);
      mpfr_add(b_hi.get(), b_hi.get(), node.lo_hi.get(), MPFR_RNDU);
      if (mpfr_cmp(b_hi.get(), m_lo.get()) > 0) break;
      j = k;
    }
    if (j > 0) {
      mpfr_mul(tmp.get(), node.w_lo.get(), split.Q[j].get(), MPFR_RNDD);
      mpfr_add(node.lo_lo.get(), node.lo_lo.get(), tmp.get(), MPFR_RNDD);
      mpfr_mul(tmp.get(), node.w_hi.get(), split.Q[j].get(), MPFR_RNDU);
      mpfr_add(node.lo_hi.get(), node.lo_hi.get(), tmp.get(), MPFR_RNDU);
    }
    mpfr_mul(node.w_lo.get(), node.w_lo.get(), split.q_lo[j].get(), MPFR_RNDD);
    mpfr_mul(node.w_hi.get(), node.w_hi.get(), split.q_hi[j].get(), MPFR_RNDU);
    path.push_back(static_cast<Symbol>(j));

    if (!stop_depth && mpfr_cmp_d(node.w_hi.get(), half) <= 0) stop_depth = depth;
    if (stop_depth) {
      mpfr_add(tmp.get(), node.lo_hi.get(), node.w_hi.get(), MPFR_RNDU);
      const bool inside =
          mpfr_cmp(node.lo_lo.get(), f_hi.get()) >= 0 && mpfr_cmp(tmp.get(), end_lo.get()) <= 0;
      if (inside) return path;
      // One extra level is tolerated; beyond that the enclosures are too wide.
      if (depth > *stop_depth) return std::nullopt;
    }
  }
  throw NumericError("interval code descent exceeded the maximum depth");
}

} // namespace

PrefixCode build_exact_code(const SequenceDist& dist, const CostModel& model,
                            const BuildOptions& options, BuildReport* report) {
  if (dist.entries.empty()) throw ConfigError("cannot build a code for an empty support");
  if (model.has_conditional()) {
    throw ConfigError("build_exact_code requires a memoryless cost model");
  }
  for (const auto& [x, p] : dist.entries) {
    if (!(p > 0.0) || !std::isfinite(p)) throw ConfigError("block probabilities must be positive");
  }
  const double alpha_c = solve_cost_capacity(model).alpha_c;
  const std::size_t K = model.K();

  std::vector<CodeEntry> entries;
  entries.reserve(dist.entries.size());
  unsigned used = 0;

  if (dist.entries.size() == 1) {
    // A lone block needs no interval: the cheapest single symbol is a complete code.
    entries.push_back({dist.entries[0].first, {model.cheapest_symbol()}, dist.entries[0].second});
  } else {
    for (unsigned prec = std::max(64u, options.precision_bits);; prec *= 2) {
      if (prec > std::max(options.precision_bits, options.max_precision_bits)) {
        throw NumericError("precision exhaustion: codeword certification failed at " +
                           std::to_string(prec / 2) + " bits");
      }
      const SplitTable split = make_split_table(model, alpha_c, prec);
      BigFloat f_lo(prec, 0.0), f_hi(prec, 0.0);
      entries.clear();
      bool certified = true;
      for (const auto& [x, p] : dist.entries) {
        auto word = descend(split, K, f_lo, f_hi, p, prec);
        if (!word) {
          certified = false;
          break;
        }
        entries.push_back({x, std::move(*word), p});
        mpfr_add_d(f_lo.get(), f_lo.get(), p, MPFR_RNDD);
        mpfr_add_d(f_hi.get(), f_hi.get(), p, MPFR_RNDU);
      }
      if (certified) {
        used = prec;
        break;
      }
    }
  }

  PrefixCode code(dist.n, model, alpha_c, std::move(entries));
  if (report != nullptr) {
    report->precision_bits_used = used;
    std::size_t tight = 0;
    for (const auto& e : code.entries()) {
      if (e.cost <= ideal_cost_bound(e.probability, alpha_c, model.c_max(), K) + 1e-9) ++tight;
    }
    report->ideal_bound_fraction =
        static_cast<double>(tight) / static_cast<double>(code.entries().size());
  }
  return code;
}

PrefixCode random_prefix_code(const SequenceDist& dist, const CostModel& model, double alpha_c,
                              std::uint64_t seed) {
  if (dist.entries.empty()) throw ConfigError("cannot build a code for an empty support");
  const std::size_t K = model.K();
  auto rng = make_stream(seed, 0);

  // Grow a complete tree by splitting uniformly chosen leaves.
  std::vector<Codeword> leaves;
  for (std::size_t u = 0; u < K; ++u) leaves.push_back({static_cast<Symbol>(u)});
  while (leaves.size() < dist.entries.size()) {
    std::uniform_int_distribution<std::size_t> pick(0, leaves.size() - 1);
    const std::size_t i = pick(rng);
    Codeword parent = std::move(leaves[i]);
    leaves[i] = leaves.back();
    leaves.pop_back();
    for (std::size_t u = 0; u < K; ++u) {
      Codeword child = parent;
      child.push_back(static_cast<Symbol>(u));
      leaves.push_back(std::move(child));
    }
  }
  std::shuffle(leaves.begin(), leaves.end(), rng);

  std::vector<CodeEntry> entries;
  entries.reserve(dist.entries.size());
  for (std::size_t i = 0; i < dist.entries.size(); ++i) {
    entries.push_back({dist.entries[i].first, leaves[i], dist.entries[i].second});
  }
  return PrefixCode(dist.n, model, alpha_c, std::move(entries));
}

std::string to_csv(const PrefixCode& code) {
  std::ostringstream out;
  out << "sequence,codeword,cost\n";
  const std::size_t K = code.model().K();
  for (const auto& e : code.entries()) {
    // Source alphabets are written the same way as code strings.
    std::size_t source_alphabet = 0;
    for (Symbol s : e.sequence) source_alphabet = std::max<std::size_t>(source_alphabet, s + 1);
    out << to_string(e.sequence, source_alphabet) << ',' << to_string(e.codeword, K) << ','
        << format_double(e.cost) << '\n';
  }
  return out.str();
}

PrefixCode code_from_csv(std::string_view csv, const CostModel& model, double alpha_c) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("sequence,codeword", 0) != 0) {
    throw ConfigError("code table CSV must start with 'sequence,codeword,cost'");
  }
  std::vector<CodeEntry> entries;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos) throw ConfigError("malformed code table row '" + line + "'");
    CodeEntry e;
    e.sequence = parse_symbols(line.substr(0, c1));
    e.codeword = parse_symbols(line.substr(c1 + 1, c2 == std::string::npos ? c2 : c2 - c1 - 1));
    n = e.sequence.size();
    entries.push_back(std::move(e));
  }
  return PrefixCode(n, model, alpha_c, std::move(entries));
}

// ---------------------------------------------------------------------------
// Overflow

std::string_view to_string(OverflowMethod method) {
  switch (method) {
  case OverflowMethod::exact: return "exact";
  case OverflowMethod::monte_carlo: return "monte-carlo";
  case OverflowMethod::surrogate_mc: return "surrogate-mc";
  }
  return "?";
}

OverflowMethod parse_overflow_method(std::string_view name) {
  if (name == "exact") return OverflowMethod::exact;
  if (name == "monte-carlo" || name == "mc") return OverflowMethod::monte_carlo;
  if (name == "surrogate-mc") return OverflowMethod::surrogate_mc;
  throw ConfigError("unknown overflow method '" + std::string(name) + "'");
}

OverflowThreshold OverflowThreshold::first_order(double R) {
  if (!(R > 0.0) || !std::isfinite(R)) throw ConfigError("first-order threshold needs 0 < R < inf");
  OverflowThreshold t;
  t.kind = Kind::first_order;
  t.R = R;
  return t;
}

OverflowThreshold OverflowThreshold::second_order(double a, double L) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("second-order center needs 0 < a < inf");
  if (!std::isfinite(L)) throw ConfigError("second-order L must be finite");
  OverflowThreshold t;
  t.kind = Kind::second_order;
  t.a = a;
  t.L = L;
  return t;
}

OverflowThreshold OverflowThreshold::raw(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must lie in (0, inf)");
  OverflowThreshold t;
  t.kind = Kind::raw;
  t.eta = eta;
  return t;
}

double OverflowThreshold::eta_for(std::size_t n) const {
  const double nn = static_cast<double>(n);
  double value = eta;
  switch (kind) {
  case Kind::first_order: value = nn * R; break;
  case Kind::second_order: value = nn * a + L * std::sqrt(nn); break;
  case Kind::raw: break;
  }
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError("threshold eta_n = " + format_double(value) + " is not in (0, inf)");
  }
  return value;
}

OverflowResult overflow(const PrefixCode& code, const OverflowQuery& query) {
  const double eta = query.threshold.eta_for(code.n());
  OverflowResult result;
  result.eta = eta;
  result.method = query.method;
  const auto& entries = code.entries();

  switch (query.method) {
  case OverflowMethod::exact: {
    double p = 0.0;
    for (const auto& e : entries) {
      if (e.cost > eta) p += e.probability;
    }
    result.probability = std::min(1.0, p);
    break;
  }
  case OverflowMethod::monte_carlo: {
    if (query.samples < 1) throw ConfigError("monte-carlo mode needs at least one sample");
    std::vector<double> cumulative(entries.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < entries.size(); ++i) cumulative[i] = acc += entries[i].probability;
    std::vector<std::uint8_t> hit(query.samples, 0);
    for_each_chunk(query.samples, query.workers,
                   [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                     auto rng = make_stream(query.seed, chunk);
                     std::uniform_real_distribution<double> unit(0.0, acc);
                     for (std::size_t s = begin; s < end; ++s) {
                       auto it = std::upper_bound(cumulative.begin(), cumulative.end(), unit(rng));
                       if (it == cumulative.end()) --it;
                       hit[s] = entries[static_cast<std::size_t>(it - cumulative.begin())].cost > eta;
                     }
                   });
    const double N = static_cast<double>(query.samples);
    result.probability = static_cast<double>(std::accumulate(hit.begin(), hit.end(), 0.0)) / N;
    result.stderr_ = std::sqrt(result.probability * (1.0 - result.probability) / N);
    break;
  }
  case OverflowMethod::surrogate_mc:
    throw ConfigError("surrogate-mc evaluates a source model, not a code table");
  }
  return result;
}

OverflowResult overflow(const Source& source, const CostModel& model, double alpha_c,
                        const OverflowQuery& query) {
  if (query.method != OverflowMethod::surrogate_mc) {
    throw ConfigError(std::string(to_string(query.method)) +
                      " overflow needs a code table; use surrogate-mc for a source model");
  }
  if (query.samples < 1) throw ConfigError("surrogate-mc needs at least one sample");
  const double eta = query.threshold.eta_for(query.n);
  const double base = static_cast<double>(model.K());
  const auto info =
      sample_self_info(source, query.n, query.samples, query.seed, base, query.workers);
  const double offset = log_base(2.0, base) / alpha_c + 2.0 * model.c_max();
  std::size_t over = 0;
  for (double s : info) {
    if (s / alpha_c + offset > eta) ++over;
  }
  OverflowResult result;
  result.eta = eta;
  result.method = OverflowMethod::surrogate_mc;
  result.surrogate_upper_bound = true;
  const double N = static_cast<double>(info.size());
  result.probability = static_cast<double>(over) / N;
  result.stderr_ = std::sqrt(result.probability * (1.0 - result.probability) / N);
  return result;
}

std::string to_csv(const std::vector<OverflowResult>& results) {
  std::ostringstream out;
  out << "eta,probability,stderr,method\n";
  for (const auto& r : results) {
    out << format_double(r.eta) << ',' << format_double(r.probability) << ','
        << format_double(r.stderr_) << ',' << to_string(r.method) << '\n';
  }
  return out.str();
}

} // namespace costcode
