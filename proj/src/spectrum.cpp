#include "costcode/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <sstream>
#include <utility>

#include "costcode/error.hpp"
#include "costcode/format.hpp"

namespace costcode {

namespace {

constexpr std::size_t kMaxLatticeSupport = 20'000'000;

// Weighted statistic values sorted ascending, with suffix masses.
struct TailTable {
  std::vector<double> values;
  std::vector<double> suffix;   // suffix[i] = sum_{j >= i} mass_j; suffix[size] = 0

  static TailTable build(std::vector<std::pair<double, double>> weighted) {
    std::sort(weighted.begin(), weighted.end());
    TailTable t;
    t.values.reserve(weighted.size());
    t.suffix.assign(weighted.size() + 1, 0.0);
    for (const auto& w : weighted) t.values.push_back(w.first);
    for (std::size_t i = weighted.size(); i-- > 0;) {
      t.suffix[i] = t.suffix[i + 1] + weighted[i].second;
    }
    return t;
  }

  // Total mass with statistic >= threshold.
  double tail(double threshold) const {
    const auto it = std::lower_bound(values.begin(), values.end(), threshold);
    return suffix[static_cast<std::size_t>(it - values.begin())];
  }
};

using Statistic = std::function<double(double)>;   // self-information -> statistic

void check_query(const SpectrumQuery& q) {
  if (q.n < 1) throw ConfigError("blocklength n must be at least 1");
  if (!(q.alpha_c > 0.0)) throw ConfigError("alpha_c must be positive");
  if (q.K < 2) throw ConfigError("log base K must be at least 2");
  if (q.grid.empty()) throw ConfigError("spectrum grid must be nonempty");
  if (!std::is_sorted(q.grid.begin(), q.grid.end())) {
    throw ConfigError("spectrum grid must be sorted ascending");
  }
  if (q.method == SpectrumMethod::monte_carlo && q.samples < 1) {
    throw ConfigError("monte-carlo mode needs at least one sample");
  }
  if (q.method == SpectrumMethod::dp && !(q.lattice_step > 0.0)) {
    throw ConfigError("lattice step must be positive");
  }
}

using Lattice = std::vector<std::pair<std::int64_t, double>>;   // sorted by index

// n-fold convolution of a per-symbol lattice law, kept sparse: an i.i.d.
// block has at most as many distinct sums as it has types.
Lattice convolve_power(const std::vector<std::pair<std::int64_t, double>>& step, std::size_t n) {
  Lattice dist{{0, 1.0}};
  Lattice next;
  using Head = std::pair<std::int64_t, std::size_t>;   // (index, which shifted copy)
  for (std::size_t round = 0; round < n; ++round) {
    next.clear();
    next.reserve(dist.size() * step.size());
    std::vector<std::size_t> pos(step.size(), 0);
    std::priority_queue<Head, std::vector<Head>, std::greater<>> heap;
    for (std::size_t k = 0; k < step.size(); ++k) heap.emplace(dist[0].first + step[k].first, k);
    while (!heap.empty()) {
      const auto [idx, k] = heap.top();
      heap.pop();
      const double mass = dist[pos[k]].second * step[k].second;
      if (!next.empty() && next.back().first == idx) {
        next.back().second += mass;
      } else {
        next.emplace_back(idx, mass);
      }
      if (++pos[k] < dist.size()) heap.emplace(dist[pos[k]].first + step[k].first, k);
    }
    if (next.size() > kMaxLatticeSupport) {
      throw ConfigError("dp lattice support exceeds " + std::to_string(kMaxLatticeSupport) +
                        " points; use monte-carlo mode");
    }
    dist.swap(next);
  }
  return dist;
}

SpectrumCurve evaluate(const SpectrumQuery& q, const Statistic& statistic) {
  check_query(q);
  const double base = static_cast<double>(q.K);
  SpectrumCurve curve;
  curve.method = q.method;

  switch (q.method) {
  case SpectrumMethod::exact: {
    const auto dist = enumerate_support(q.source, q.n, q.support_cap);
    std::vector<std::pair<double, double>> weighted;
    weighted.reserve(dist.entries.size());
    for (const auto& [x, p] : dist.entries) {
      weighted.emplace_back(statistic(-log_prob(q.source, x, base)), p);
    }
    const auto table = TailTable::build(std::move(weighted));
    for (double t : q.grid) {
      const double p = std::min(1.0, table.tail(t));
      curve.points.push_back({t, p, 0.0, p, p});
    }
    break;
  }
  case SpectrumMethod::monte_carlo: {
    const auto samples = sample_self_info(q.source, q.n, q.samples, q.seed, base, q.workers);
    std::vector<std::pair<double, double>> weighted;
    weighted.reserve(samples.size());
    const double N = static_cast<double>(samples.size());
    for (double s : samples) weighted.emplace_back(statistic(s), 1.0);
    const auto table = TailTable::build(std::move(weighted));
    for (double t : q.grid) {
      const double p = table.tail(t) / N;   // integer count, so exact up to one rounding
      const double se = std::sqrt(p * (1.0 - p) / N);
      curve.points.push_back({t, p, se, p, p});
    }
    break;
  }
  case SpectrumMethod::dp: {
    const auto* iid = std::get_if<IidSource>(&q.source);
    if (iid == nullptr) {
      throw ConfigError("dp mode supports i.i.d. sources only; evaluate mixture components "
                        "separately");
    }
    // Round each per-symbol self-information down and up onto the lattice;
    // the block sums then bracket the true self-information.
    std::vector<std::pair<std::int64_t, double>> down, up;
    for (Symbol u : iid->support()) {
      const double p = iid->prob(u);
      const double s = -log_base(p, base);
      auto lo = static_cast<std::int64_t>(std::floor(s / q.lattice_step));
      while (static_cast<double>(lo) * q.lattice_step > s) --lo;
      auto hi = static_cast<std::int64_t>(std::ceil(s / q.lattice_step));
      while (static_cast<double>(hi) * q.lattice_step < s) ++hi;
      down.emplace_back(lo, p);
      up.emplace_back(hi, p);
    }
    auto to_table = [&](const Lattice& lattice) {
      std::vector<std::pair<double, double>> weighted;
      weighted.reserve(lattice.size());
      for (const auto& [idx, mass] : lattice) {
        weighted.emplace_back(statistic(static_cast<double>(idx) * q.lattice_step), mass);
      }
      return TailTable::build(std::move(weighted));
    };
    const auto lower_table = to_table(convolve_power(down, q.n));
    const auto upper_table = to_table(convolve_power(up, q.n));
    for (double t : q.grid) {
      const double lo = std::min(1.0, lower_table.tail(t));
      const double hi = std::max(lo, std::min(1.0, upper_table.tail(t)));
      curve.points.push_back({t, 0.5 * (lo + hi), 0.5 * (hi - lo), lo, hi});
    }
    break;
  }
  }
  return curve;
}

} // namespace

std::string_view to_string(SpectrumMethod method) {
  switch (method) {
  case SpectrumMethod::exact: return "exact";
  case SpectrumMethod::dp: return "dp";
  case SpectrumMethod::monte_carlo: return "monte-carlo";
  }
  return "?";
}

SpectrumMethod parse_spectrum_method(std::string_view name) {
  if (name == "exact") return SpectrumMethod::exact;
  if (name == "dp") return SpectrumMethod::dp;
  if (name == "monte-carlo" || name == "mc") return SpectrumMethod::monte_carlo;
  throw ConfigError("unknown spectrum method '" + std::string(name) + "'");
}

SpectrumCurve first_order_spectrum(const SpectrumQuery& query) {
  const double scale = static_cast<double>(query.n) * query.alpha_c;
  return evaluate(query, [scale](double s) { return s / scale; });
}

SpectrumCurve second_order_spectrum(const SpectrumQuery& query) {
  if (!(query.a > 0.0)) throw ConfigError("second-order center a must be positive");
  const double n = static_cast<double>(query.n);
  const double center = n * query.alpha_c * query.a;
  const double scale = std::sqrt(n) * query.alpha_c;
  return evaluate(query, [center, scale](double s) { return (s - center) / scale; });
}

std::string to_csv(const SpectrumCurve& curve) {
  std::ostringstream out;
  out << "threshold,probability,stderr,method\n";
  for (const auto& p : curve.points) {
    out << format_double(p.threshold) << ',' << format_double(p.probability) << ','
        << format_double(p.stderr_) << ',' << to_string(curve.method) << '\n';
  }
  return out.str();
}

StrongConverseReport strong_converse_diagnostic(const Source& source,
                                                std::span<const std::size_t> n_list,
                                                double delta, std::size_t K,
                                                std::size_t samples, std::uint64_t seed,
                                                unsigned workers) {
  if (!(delta > 0.0 && delta < 0.5)) throw ConfigError("delta must lie in (0, 0.5)");
  if (n_list.empty()) throw ConfigError("n list must be nonempty");
  const double base = static_cast<double>(K);

  StrongConverseReport report;
  report.delta = delta;
  if (const auto* mix = std::get_if<MixedSource>(&source)) {
    report.predicted_gap = std::abs(entropy(mix->components()[0], base) -
                                    entropy(mix->components()[1], base));
  }

  // Smallest order statistic whose empirical CDF reaches the level.
  auto quantile = [](const std::vector<double>& sorted, double level) {
    const double rank = std::ceil(level * static_cast<double>(sorted.size()) - 1e-9);
    const auto idx = static_cast<std::size_t>(std::clamp(rank, 1.0, double(sorted.size()))) - 1;
    return sorted[idx];
  };

  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const std::size_t n = n_list[i];
    if (n < 1) throw ConfigError("blocklength n must be at least 1");
    // Each blocklength gets its own seed so rows are independent.
    auto values = sample_self_info(source, n, samples, seed + i, base, workers);
    for (double& v : values) v /= static_cast<double>(n);
    std::sort(values.begin(), values.end());
    StrongConverseRow row;
    row.n = n;
    row.lower_quantile = quantile(values, delta);
    row.upper_quantile = quantile(values, 1.0 - delta);
    row.gap = row.upper_quantile - row.lower_quantile;
    report.rows.push_back(row);
  }

  const auto& first = report.rows.front();
  const auto& last = report.rows.back();
  if (std::all_of(report.rows.begin(), report.rows.end(),
                  [](const StrongConverseRow& r) { return r.gap == 0.0; })) {
    report.verdict = "strong-converse consistent";
  } else if (report.rows.size() < 2 || first.n == last.n) {
    report.verdict = "inconclusive";
  } else {
    // Under asymptotic normality the gap scales like 1/sqrt(n); accept half of that shrinkage.
    const double expected = std::sqrt(static_cast<double>(last.n) / static_cast<double>(first.n));
    const double observed = last.gap > 0.0 ? first.gap / last.gap : expected;
    report.verdict = observed >= 0.5 * expected ? "strong-converse consistent" : "two-peak";
  }
  return report;
}

} // namespace costcode
