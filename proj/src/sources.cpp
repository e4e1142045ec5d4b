#include "costcode/sources.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "costcode/error.hpp"
#include "costcode/random.hpp"

namespace costcode {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log2 P_i(x) for an i.i.d. law given the type of x.
double iid_log2_from_counts(const IidSource& src, std::span<const std::uint64_t> counts) {
  double acc = 0.0;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (counts[s] == 0) continue;
    const double p = src.prob(static_cast<Symbol>(s));
    if (p == 0.0) return kNegInf;
    acc += static_cast<double>(counts[s]) * std::log2(p);
  }
  return acc;
}

double log2_sum_exp2(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log2(std::exp2(a - m) + std::exp2(b - m));
}

double mixed_log2_from_counts(const MixedSource& src, std::span<const std::uint64_t> counts) {
  const auto& w = src.weights();
  const auto& c = src.components();
  double l1 = iid_log2_from_counts(c[0], counts);
  double l2 = iid_log2_from_counts(c[1], counts);
  if (l1 != kNegInf) l1 += std::log2(w[0]);
  if (l2 != kNegInf) l2 += std::log2(w[1]);
  return log2_sum_exp2(l1, l2);
}

std::vector<std::uint64_t> counts_of(const Source& source, std::span<const Symbol> x) {
  std::vector<std::uint64_t> counts(alphabet_size(source), 0);
  for (Symbol s : x) {
    if (s >= counts.size()) throw ConfigError("source symbol outside the alphabet");
    ++counts[s];
  }
  return counts;
}

void draw_counts(const IidSource& src, std::size_t n, std::mt19937_64& rng,
                 std::vector<std::uint64_t>& counts) {
  std::fill(counts.begin(), counts.end(), 0);
  std::uint64_t remaining = n;
  double mass = 1.0;
  const auto& pmf = src.pmf();
  for (std::size_t s = 0; s + 1 < pmf.size() && remaining > 0; ++s) {
    if (pmf[s] <= 0.0) continue;
    const double p = mass > 0.0 ? std::clamp(pmf[s] / mass, 0.0, 1.0) : 1.0;
    std::binomial_distribution<std::uint64_t> bin(remaining, p);
    counts[s] = bin(rng);
    remaining -= counts[s];
    mass -= pmf[s];
  }
  // Whatever is left falls on the last symbol with positive probability.
  if (remaining > 0) {
    std::size_t last = pmf.size() - 1;
    while (last > 0 && pmf[last] <= 0.0) --last;
    counts[last] += remaining;
  }
}

} // namespace

IidSource::IidSource(std::vector<double> pmf) : pmf_(std::move(pmf)) {
  if (pmf_.size() < 2) throw ConfigError("source alphabet must have at least 2 symbols");
  double sum = 0.0;
  for (double p : pmf_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("pmf entries must be in [0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("pmf must sum to 1 (within 1e-12)");
}

IidSource IidSource::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("Bernoulli parameter must lie in [0, 1]");
  return IidSource({1.0 - p, p});
}

std::vector<Symbol> IidSource::support() const {
  std::vector<Symbol> out;
  for (std::size_t s = 0; s < pmf_.size(); ++s) {
    if (pmf_[s] > 0.0) out.push_back(static_cast<Symbol>(s));
  }
  return out;
}

MixedSource::MixedSource(std::array<double, 2> weights, std::array<IidSource, 2> components)
    : weights_(weights), components_(std::move(components)) {
  if (!(weights_[0] > 0.0) || !(weights_[1] > 0.0)) {
    throw ConfigError("mixture weights must be strictly positive");
  }
  if (std::abs(weights_[0] + weights_[1] - 1.0) > 1e-12) {
    throw ConfigError("mixture weights must sum to 1");
  }
  if (components_[0].alphabet_size() != components_[1].alphabet_size()) {
    throw ConfigError("mixture components must share an alphabet");
  }
}

std::vector<Symbol> MixedSource::support() const {
  std::set<Symbol> s;
  for (const auto& c : components_) {
    for (Symbol u : c.support()) s.insert(u);
  }
  return {s.begin(), s.end()};
}

std::size_t alphabet_size(const Source& source) {
  return std::visit([](const auto& s) { return s.alphabet_size(); }, source);
}

std::vector<Symbol> support(const Source& source) {
  return std::visit([](const auto& s) { return s.support(); }, source);
}

double log_base(double x, double base) {
  if (base == 2.0) return std::log2(x);
  return std::log2(x) / std::log2(base);
}

double log_prob_from_counts(const Source& source, std::span<const std::uint64_t> counts,
                            double base) {
  const double l2 = std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IidSource>) {
          return iid_log2_from_counts(s, counts);
        } else {
          return mixed_log2_from_counts(s, counts);
        }
      },
      source);
  if (l2 == kNegInf || base == 2.0) return l2;
  return l2 / std::log2(base);
}

double log_prob(const Source& source, std::span<const Symbol> x, double base) {
  const auto counts = counts_of(source, x);
  return log_prob_from_counts(source, counts, base);
}

double entropy(const IidSource& source, double base) {
  double h = 0.0;
  for (double p : source.pmf()) {
    if (p > 0.0) h -= p * log_base(p, base);
  }
  return h;
}

double varentropy(const IidSource& source, double base) {
  const auto supp = source.support();
  const double p0 = source.prob(supp.front());
  if (std::all_of(supp.begin(), supp.end(), [&](Symbol s) { return source.prob(s) == p0; })) {
    return 0.0;
  }
  const double h = entropy(source, base);
  double v = 0.0;
  for (double p : source.pmf()) {
    if (p > 0.0) {
      const double d = -log_base(p, base) - h;
      v += p * d * d;
    }
  }
  return v;
}

std::vector<double> sample_self_info(const Source& source, std::size_t n, std::size_t count,
                                     std::uint64_t seed, double base, unsigned workers) {
  if (count == 0) throw ConfigError("sample count must be at least 1");
  std::vector<double> out(count);
  for_each_chunk(count, workers, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    auto rng = make_stream(seed, chunk);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::uint64_t> counts(alphabet_size(source));
    for (std::size_t i = begin; i < end; ++i) {
      if (const auto* iid = std::get_if<IidSource>(&source)) {
        draw_counts(*iid, n, rng, counts);
      } else {
        const auto& mix = std::get<MixedSource>(source);
        const std::size_t label = unit(rng) < mix.weights()[0] ? 0 : 1;
        draw_counts(mix.components()[label], n, rng, counts);
      }
      out[i] = -log_prob_from_counts(source, counts, base);
    }
  });
  return out;
}

SequenceDist enumerate_support(const Source& source, std::size_t n, std::size_t cap) {
  const auto symbols = support(source);
  if (symbols.empty()) throw ConfigError("empty support");
  double size = std::pow(static_cast<double>(symbols.size()), static_cast<double>(n));
  if (size > static_cast<double>(cap)) {
    throw ConfigError("support too large: " + std::to_string(symbols.size()) + "^" +
                      std::to_string(n) + " = " + std::to_string(size) + " exceeds cap " +
                      std::to_string(cap));
  }

  SequenceDist dist;
  dist.n = n;
  dist.alphabet_size = alphabet_size(source);
  dist.entries.reserve(static_cast<std::size_t>(size));

  // Odometer over support symbols; index order gives lexicographic order.
  std::vector<std::size_t> digit(n, 0);
  Sequence x(n, symbols.front());
  while (true) {
    const double p = std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, IidSource>) {
            double prod = 1.0;
            for (Symbol u : x) prod *= s.prob(u);
            return prod;
          } else {
            double p1 = 1.0, p2 = 1.0;
            for (Symbol u : x) {
              p1 *= s.components()[0].prob(u);
              p2 *= s.components()[1].prob(u);
            }
            return s.weights()[0] * p1 + s.weights()[1] * p2;
          }
        },
        source);
    if (p > 0.0) dist.entries.emplace_back(x, p);

    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (++digit[pos] < symbols.size()) {
        x[pos] = symbols[digit[pos]];
        break;
      }
      digit[pos] = 0;
      x[pos] = symbols.front();
      if (pos == 0) return dist;
    }
    if (n == 0) return dist;
  }
}

} // namespace costcode
