#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "costcode/types.hpp"

namespace costcode {

// Memoryless source with a finite pmf over {0, ..., size-1}.
class IidSource {
public:
  explicit IidSource(std::vector<double> pmf);
  static IidSource bernoulli(double p);   // P(1) = p

  std::size_t alphabet_size() const { return pmf_.size(); }
  const std::vector<double>& pmf() const { return pmf_; }
  double prob(Symbol s) const { return pmf_.at(s); }
  std::vector<Symbol> support() const;

private:
  std::vector<double> pmf_;
};

// P(x) = w1 * P1(x) + w2 * P2(x): the component is chosen once per block.
class MixedSource {
public:
  MixedSource(std::array<double, 2> weights, std::array<IidSource, 2> components);

  const std::array<double, 2>& weights() const { return weights_; }
  const std::array<IidSource, 2>& components() const { return components_; }
  std::size_t alphabet_size() const { return components_[0].alphabet_size(); }
  std::vector<Symbol> support() const;

private:
  std::array<double, 2> weights_;
  std::array<IidSource, 2> components_;
};

using Source = std::variant<IidSource, MixedSource>;

std::size_t alphabet_size(const Source& source);
std::vector<Symbol> support(const Source& source);

// Logarithm to base K; base 2 goes through log2 so dyadic values stay exact.
double log_base(double x, double base);

// log_K P_{X^n}(x). Returns -inf exactly when the probability is zero.
// Mixtures use a max-shifted log-sum-exp, so nothing underflows for long blocks.
double log_prob(const Source& source, std::span<const Symbol> x, double base);

// Same quantity from symbol counts (type of x), which is all P depends on.
double log_prob_from_counts(const Source& source, std::span<const std::uint64_t> counts,
                            double base);

double entropy(const IidSource& source, double base);
double varentropy(const IidSource& source, double base);

// Self-information -log_K P_{X^n}(X^n) of `count` independent blocks of
// length n, under the full source law. Mixed sources draw the component
// label once per block. Blocks are generated in fixed-size chunks, each with
// its own stream derived from (seed, chunk index), so the output depends only
// on the seed regardless of `workers`.
std::vector<double> sample_self_info(const Source& source, std::size_t n, std::size_t count,
                                     std::uint64_t seed, double base, unsigned workers = 0);

inline constexpr std::size_t kDefaultSupportCap = std::size_t{1} << 20;

struct SequenceDist {
  std::size_t n = 0;
  std::size_t alphabet_size = 0;
  std::vector<std::pair<Sequence, double>> entries;   // lexicographic order
};

// Full support of X^n with exact (double) probabilities; zero-probability
// blocks are dropped. Throws ConfigError("support too large ...") when
// |support|^n exceeds `cap`.
SequenceDist enumerate_support(const Source& source, std::size_t n,
                               std::size_t cap = kDefaultSupportCap);

} // namespace costcode
