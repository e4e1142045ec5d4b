#include "costcode/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "costcode/error.hpp"
#include "costcode/gaussian.hpp"
#include "json.hpp"

namespace costcode {

namespace {

constexpr double kEntropyTie = 1e-12;
constexpr double kBracketTol = 1e-12;
constexpr double kCenterTol = 1e-9;

// Spectral description of a mixture, reordered so that H1 >= H2.
struct MixtureView {
  double w1, w2, H1, H2, s1, s2;
  bool swapped;
};

MixtureView view_of(const MixedSource& mix, double base) {
  MixtureView v{};
  const auto& c = mix.components();
  v.w1 = mix.weights()[0];
  v.w2 = mix.weights()[1];
  v.H1 = entropy(c[0], base);
  v.H2 = entropy(c[1], base);
  v.s1 = std::sqrt(varentropy(c[0], base));
  v.s2 = std::sqrt(varentropy(c[1], base));
  v.swapped = v.H1 < v.H2;
  if (v.swapped) {
    std::swap(v.w1, v.w2);
    std::swap(v.H1, v.H2);
    std::swap(v.s1, v.s2);
  }
  return v;
}

// Case I does not depend on the weights, so the boundary only matters otherwise.
void check_mixture_eps(const MixtureView& v, double eps) {
  if (std::abs(v.H1 - v.H2) > kEntropyTie && eps == v.w1) {
    throw ConfigError("eps equals the weight w(1) of the higher-entropy component; this "
                      "boundary is excluded");
  }
}

ThresholdCase classify(const MixtureView& v, double eps) {
  if (std::abs(v.H1 - v.H2) <= kEntropyTie) return ThresholdCase::mixed_I;
  return eps < v.w1 ? ThresholdCase::mixed_II : ThresholdCase::mixed_III;
}

void echo_mixture(ThresholdResult& r, const MixtureView& v) {
  r.entropies = {v.H1, v.H2};
  r.sigmas = {v.s1, v.s2};
  r.weights = {v.w1, v.w2};
  r.swapped = v.swapped;
}

// Phi(t / sigma), read as the unit step at t = 0 when sigma = 0.
double scaled_cdf(double t, double sigma) {
  if (sigma == 0.0) return t >= 0.0 ? 1.0 : 0.0;
  return gaussian_cdf(t / sigma);
}

// inf{ T : G(T) <= eps } for nonincreasing G, by bisection.
struct RootSolve {
  double value;
  double lo;
  double hi;
};

RootSolve infimum_below(const std::function<double(double)>& G, double eps, double half_width) {
  double lo = -half_width;
  double hi = half_width;
  for (int grow = 0; G(lo) <= eps; ++grow) {
    if (grow > 60) throw NumericError("threshold bracket could not be established");
    lo *= 2.0;
  }
  for (int grow = 0; G(hi) > eps; ++grow) {
    if (grow > 60) throw NumericError("threshold bracket could not be established");
    hi *= 2.0;
  }
  while (hi - lo > kBracketTol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (G(mid) <= eps) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return {hi, lo, hi};
}

void check_eps_open(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("eps must lie in (0, 1)");
}

} // namespace

std::string_view to_string(ThresholdCase c) {
  switch (c) {
  case ThresholdCase::iid: return "iid";
  case ThresholdCase::mixed_I: return "mixed-I";
  case ThresholdCase::mixed_II: return "mixed-II";
  case ThresholdCase::mixed_III: return "mixed-III";
  case ThresholdCase::mixed_step: return "mixed-step";
  }
  return "?";
}

ThresholdResult first_order_threshold(const Source& source, const CostModel& model, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("eps must lie in [0, 1)");
  const double alpha = solve_cost_capacity(model).alpha_c;
  const double base = static_cast<double>(model.K());

  ThresholdResult r;
  r.kind = ThresholdResult::Kind::first_order;
  r.eps = eps;
  r.alpha_c = alpha;
  if (const auto* iid = std::get_if<IidSource>(&source)) {
    // Strong converse: the same rate for every eps.
    const double H = entropy(*iid, base);
    r.value = H / alpha;
    r.case_label = ThresholdCase::iid;
    r.entropies = {H};
    r.sigmas = {std::sqrt(varentropy(*iid, base))};
    r.weights = {1.0};
  } else {
    const auto v = view_of(std::get<MixedSource>(source), base);
    check_mixture_eps(v, eps);
    echo_mixture(r, v);
    r.case_label = classify(v, eps);
    r.value = (eps < v.w1 ? v.H1 : v.H2) / alpha;
  }
  if (!(r.value > 0.0)) throw ConfigError("source has zero entropy; R(eps|X) would be 0");
  return r;
}

double admissible_center(const Source& source, const CostModel& model, double eps) {
  const double alpha = solve_cost_capacity(model).alpha_c;
  const double base = static_cast<double>(model.K());
  if (const auto* iid = std::get_if<IidSource>(&source)) return entropy(*iid, base) / alpha;
  const auto v = view_of(std::get<MixedSource>(source), base);
  check_mixture_eps(v, eps);
  return classify(v, eps) == ThresholdCase::mixed_III ? v.H2 / alpha : v.H1 / alpha;
}

ThresholdResult second_order_threshold(const Source& source, const CostModel& model, double eps,
                                       std::optional<double> a) {
  check_eps_open(eps);
  const double alpha = solve_cost_capacity(model).alpha_c;
  const double base = static_cast<double>(model.K());
  const double center = admissible_center(source, model, eps);
  if (a && std::abs(*a - center) > kCenterTol * std::max(1.0, center)) {
    throw ConfigError("a = " + std::to_string(*a) + " is not the admissible first-order centre " +
                      std::to_string(center) + " for this source and eps");
  }
  if (!(center > 0.0)) throw ConfigError("second-order centre must be positive");

  ThresholdResult r;
  r.kind = ThresholdResult::Kind::second_order;
  r.eps = eps;
  r.a = center;
  r.alpha_c = alpha;

  if (const auto* iid = std::get_if<IidSource>(&source)) {
    const double sigma = std::sqrt(varentropy(*iid, base));
    r.case_label = ThresholdCase::iid;
    r.entropies = {entropy(*iid, base)};
    r.sigmas = {sigma};
    r.weights = {1.0};
    r.value = sigma / alpha * gaussian_quantile(1.0 - eps);
    return r;
  }

  const auto v = view_of(std::get<MixedSource>(source), base);
  echo_mixture(r, v);
  const ThresholdCase c = classify(v, eps);

  std::function<double(double)> G;
  bool degenerate = false;
  switch (c) {
  case ThresholdCase::mixed_I:
    G = [&](double T) {
      return 1.0 - v.w1 * scaled_cdf(T * alpha, v.s1) - v.w2 * scaled_cdf(T * alpha, v.s2);
    };
    degenerate = v.s1 == 0.0 || v.s2 == 0.0;
    break;
  case ThresholdCase::mixed_II:
    G = [&](double T) { return v.w1 * (1.0 - scaled_cdf(alpha * T, v.s1)); };
    degenerate = v.s1 == 0.0;
    break;
  default:
    G = [&](double T) { return v.w1 + v.w2 * (1.0 - scaled_cdf(alpha * T, v.s2)); };
    degenerate = v.s2 == 0.0;
    break;
  }
  const double sigma_max = std::max(v.s1, v.s2);
  const double half_width = sigma_max > 0.0 ? 20.0 * sigma_max / alpha : 1.0;
  const auto root = infimum_below(G, eps, half_width);
  r.value = root.value;
  r.root_solved = true;
  r.case_label = degenerate ? ThresholdCase::mixed_step : c;
  // A step mixture has no exact root; report the final bracket instead.
  r.residual = degenerate ? root.hi - root.lo : std::abs(G(root.value) - eps);
  return r;
}

std::string to_json(const ThresholdResult& r) {
  nlohmann::ordered_json j;
  j["kind"] = r.kind == ThresholdResult::Kind::first_order ? "first-order" : "second-order";
  j["value"] = r.value;
  j["case"] = std::string(to_string(r.case_label));
  j["residual"] = r.residual;
  j["root_solved"] = r.root_solved;
  j["eps"] = r.eps;
  if (r.kind == ThresholdResult::Kind::second_order) j["a"] = r.a;
  j["alpha_c"] = r.alpha_c;
  j["entropies"] = r.entropies;
  j["sigmas"] = r.sigmas;
  j["weights"] = r.weights;
  j["swapped"] = r.swapped;
  return j.dump(2);
}

FixedLengthCode vl_to_fl(const PrefixCode& code, double eta) {
  FixedLengthCode fl;
  fl.n = code.n();
  double err = 0.0;
  for (const auto& e : code.entries()) {
    if (e.cost <= eta) {
      fl.members.push_back(e.sequence);
    } else {
      err += e.probability;
    }
  }
  std::sort(fl.members.begin(), fl.members.end());
  fl.M = fl.members.size();
  fl.error_probability = std::min(1.0, err);
  return fl;
}

FlagCode fl_to_vl(const FixedLengthCode& fl, const SequenceDist& dist, const CostModel& model,
                  const BuildOptions& options) {
  if (fl.members.empty()) throw ConfigError("fixed-length code has an empty decoding set T_n");
  if (model.has_conditional()) throw ConfigError("fl_to_vl requires a memoryless cost model");
  const std::set<Sequence> members(fl.members.begin(), fl.members.end());
  std::map<Sequence, double> prob;
  for (const auto& [x, p] : dist.entries) prob[x] = p;
  for (const auto& x : members) {
    if (!prob.count(x)) throw ConfigError("T_n member " + to_string(x) + " is outside the support");
  }

  const auto& costs = model.costs();
  const Symbol flag = model.cheapest_symbol();
  Symbol escape = flag == 0 ? 1 : 0;
  for (std::size_t u = 0; u < costs.size(); ++u) {
    if (u != flag && costs[u] < costs[escape]) escape = static_cast<Symbol>(u);
  }

  SequenceDist inside{dist.n, dist.alphabet_size, {}};
  const double uniform = 1.0 / static_cast<double>(members.size());
  for (const auto& x : members) inside.entries.emplace_back(x, uniform);

  SequenceDist outside{dist.n, dist.alphabet_size, {}};
  double out_mass = 0.0;
  for (const auto& [x, p] : dist.entries) {
    if (!members.count(x)) {
      outside.entries.emplace_back(x, p);
      out_mass += p;
    }
  }
  for (auto& entry : outside.entries) entry.second /= out_mass;

  std::vector<CodeEntry> entries;
  auto append = [&](const SequenceDist& part, Symbol prefix) {
    const PrefixCode sub = build_exact_code(part, model, options);
    for (const auto& e : sub.entries()) {
      Codeword w{prefix};
      w.insert(w.end(), e.codeword.begin(), e.codeword.end());
      entries.push_back({e.sequence, std::move(w), prob.at(e.sequence)});
    }
  };
  append(inside, flag);
  if (!outside.entries.empty()) append(outside, escape);
  std::sort(entries.begin(), entries.end(),
            [](const CodeEntry& a, const CodeEntry& b) { return a.sequence < b.sequence; });

  const double alpha = solve_cost_capacity(model).alpha_c;
  const double base = static_cast<double>(model.K());
  const double certificate = log_base(static_cast<double>(members.size()), base) / alpha +
                             log_base(2.0, base) / alpha + 2.0 * model.c_max() + costs[flag] +
                             model.c_max();
  return {PrefixCode(dist.n, model, alpha, std::move(entries)), flag, escape, certificate};
}

namespace {

void finish(LemmaBounds& b, double z, double alpha, double c_max, double base) {
  b.lower_raw -= z;
  b.upper_raw += z * std::pow(base, alpha * c_max + 1.0);
  b.lower = std::clamp(b.lower_raw, 0.0, 1.0);
  b.upper = std::clamp(b.upper_raw, 0.0, 1.0);
}

} // namespace

LemmaBounds lemma_bounds(const SequenceDist& dist, const CostModel& model, double alpha_c,
                         double eta, double z) {
  if (!(z > 0.0)) throw ConfigError("z must be positive");
  const double base = static_cast<double>(model.K());
  const double log_z = log_base(z, base);
  const double lower_cut = log_z - alpha_c * eta;                      // log P <= this
  const double upper_cut = -alpha_c * (eta - model.c_max()) - log_z;   // log P <= this
  LemmaBounds b;
  for (const auto& [x, p] : dist.entries) {
    const double lp = log_base(p, base);
    if (lp <= lower_cut) b.lower_raw += p;
    if (lp <= upper_cut) b.upper_raw += p;
  }
  finish(b, z, alpha_c, model.c_max(), base);
  return b;
}

LemmaBounds lemma_bounds(const Source& source, const CostModel& model, std::size_t n, double eta,
                         double z, BoundMethod method, std::size_t samples, std::uint64_t seed,
                         unsigned workers) {
  if (!(z > 0.0)) throw ConfigError("z must be positive");
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  const double alpha = solve_cost_capacity(model).alpha_c;
  if (method == BoundMethod::exact) {
    return lemma_bounds(enumerate_support(source, n), model, alpha, eta, z);
  }
  const double base = static_cast<double>(model.K());
  const double log_z = log_base(z, base);
  const auto info = sample_self_info(source, n, samples, seed, base, workers);
  std::size_t lo = 0, hi = 0;
  for (double s : info) {
    if (-s <= log_z - alpha * eta) ++lo;
    if (-s <= -alpha * (eta - model.c_max()) - log_z) ++hi;
  }
  const double N = static_cast<double>(info.size());
  LemmaBounds b;
  b.lower_raw = static_cast<double>(lo) / N;
  b.upper_raw = static_cast<double>(hi) / N;
  b.lower_stderr = std::sqrt(b.lower_raw * (1.0 - b.lower_raw) / N);
  b.upper_stderr = std::sqrt(b.upper_raw * (1.0 - b.upper_raw) / N);
  finish(b, z, alpha, model.c_max(), base);
  return b;
}

} // namespace costcode
