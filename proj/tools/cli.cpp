#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "costcode/analysis.hpp"
#include "costcode/codec.hpp"
#include "costcode/cost_model.hpp"
#include "costcode/error.hpp"
#include "costcode/format.hpp"
#include "costcode/gaussian.hpp"
#include "costcode/io.hpp"
#include "costcode/sources.hpp"
#include "costcode/spectrum.hpp"
#include "json.hpp"

namespace costcode::cli {

namespace {

using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Argument helpers

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, sep)) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

double to_double(const std::string& tok) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("'" + tok + "' is not a number");
  }
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  for (const auto& tok : split(text, ',')) out.push_back(to_double(tok));
  if (out.empty()) throw ConfigError("expected a comma-separated list of numbers");
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& tok : split(text, ',')) {
    const double v = to_double(tok);
    if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("'" + tok + "' is not a positive integer");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw ConfigError("expected a comma-separated list of integers");
  return out;
}

// "v1,v2,..." or "lo:hi:count" (inclusive, evenly spaced).
std::vector<double> parse_grid(const std::string& text) {
  if (text.find(':') == std::string::npos) return parse_doubles(text);
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ConfigError("grid range must be lo:hi:count");
  const double lo = to_double(parts[0]);
  const double hi = to_double(parts[1]);
  const double count = to_double(parts[2]);
  if (!(count >= 1.0) || count != std::floor(count)) throw ConfigError("grid count must be >= 1");
  const auto m = static_cast<std::size_t>(count);
  std::vector<double> out;
  for (std::size_t i = 0; i < m; ++i) {
    out.push_back(m == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1));
  }
  return out;
}

std::vector<std::string> read_lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::size_t symbol_alphabet(const std::vector<Symbol>& s) {
  std::size_t m = 0;
  for (Symbol u : s) m = std::max<std::size_t>(m, u + 1);
  return m;
}

std::string sequence_text(const Sequence& x) { return to_string(x, symbol_alphabet(x)); }

// ---------------------------------------------------------------------------
// Shared state filled in by the parser

struct Options {
  std::string source_path;
  std::string costs_path;
  std::string output;
  std::string table_path;
  std::string report_path;
  double log_base = 0.0;   // 0: base K
  unsigned workers = 0;

  std::size_t n = 1;
  std::string n_list = "1000,10000";
  std::string grid;
  std::string method;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  std::size_t count = 1000;
  double lattice_step = 1e-4;
  unsigned precision = 0;
  unsigned max_precision = 4096;
  double delta = 0.05;
  double eps = 0.0;
  std::optional<double> a;
  std::string R, L, eta, z = "0.1,0.01";
  std::string values;
  std::string x, w;
  std::string members, members_file;
};

struct Context {
  Options opt;
  std::ostream* out = nullptr;
  std::function<void(Context&)> action;

  CostModel model() const { return load_cost_model(opt.costs_path); }
  Source source() const { return load_source(opt.source_path); }

  // Scale factor taking a base-K logarithm to the display base.
  double log_scale(std::size_t K) const {
    if (opt.log_base == 0.0) return 1.0;
    return std::log(static_cast<double>(K)) / std::log(opt.log_base);
  }

  void emit(const std::string& text) const {
    if (opt.output.empty()) {
      *out << text;
      if (!text.empty() && text.back() != '\n') *out << '\n';
    } else {
      write_file(opt.output, text);
    }
  }
  void emit(const ordered_json& j) const { emit(j.dump(2) + "\n"); }
};

BuildOptions build_options(const Options& opt) {
  BuildOptions b;
  if (opt.precision != 0) b.precision_bits = opt.precision;
  b.max_precision_bits = opt.max_precision;
  return b;
}

// Code table from --table (probabilities taken from the source when given)
// or a fresh interval code for the enumerated support.
PrefixCode obtain_code(const Context& ctx, const CostModel& model, bool need_source) {
  const double alpha = solve_cost_capacity(model).alpha_c;
  if (ctx.opt.table_path.empty()) {
    if (ctx.opt.source_path.empty()) throw ConfigError("--source or --table is required");
    return build_exact_code(enumerate_support(ctx.source(), ctx.opt.n), model,
                            build_options(ctx.opt));
  }
  PrefixCode table = code_from_csv(read_file(ctx.opt.table_path), model, alpha);
  if (!need_source && ctx.opt.source_path.empty()) return table;
  if (ctx.opt.source_path.empty()) throw ConfigError("--source is required with --table here");
  const Source source = ctx.source();
  std::vector<CodeEntry> entries = table.entries();
  for (auto& e : entries) e.probability = std::exp2(log_prob(source, e.sequence, 2.0));
  return PrefixCode(table.n(), model, alpha, std::move(entries));
}

OverflowThreshold threshold_of(const Options& opt, double value) {
  if (!opt.R.empty()) return OverflowThreshold::first_order(value);
  if (!opt.L.empty()) {
    if (!opt.a) throw ConfigError("--L needs --a");
    return OverflowThreshold::second_order(*opt.a, value);
  }
  return OverflowThreshold::raw(value);
}

std::vector<double> threshold_values(const Options& opt) {
  const int given = !opt.R.empty() + !opt.L.empty() + !opt.eta.empty();
  if (given != 1) throw ConfigError("give exactly one of --R, --L (with --a) or --eta");
  if (!opt.R.empty()) return parse_grid(opt.R);
  if (!opt.L.empty()) return parse_grid(opt.L);
  return parse_grid(opt.eta);
}

// ---------------------------------------------------------------------------
// Actions

void do_capacity(Context& ctx) {
  const CostModel model = ctx.model();
  const CostCapacity cap = solve_cost_capacity(model);
  ordered_json j;
  j["K"] = model.K();
  j["costs"] = model.costs();
  j["c_max"] = model.c_max();
  j["alpha_c"] = cap.alpha_c;
  j["residual"] = cap.residual;
  j["bracket"] = {cap.bracket.first, cap.bracket.second};
  j["q"] = symbol_measure(model, cap);
  if (model.has_conditional()) {
    j["row_capacities"] = row_capacities(model);
    j["conditional_alpha_c"] = validate_conditional_model(model).alpha_c;
  }
  ctx.emit(j);
}

void do_source_info(Context& ctx) {
  const CostModel model = ctx.model();
  const Source source = ctx.source();
  const double base = static_cast<double>(model.K());
  const double s = ctx.log_scale(model.K());
  auto describe = [&](const IidSource& src) {
    ordered_json c;
    c["pmf"] = src.pmf();
    c["entropy"] = entropy(src, base) * s;
    c["varentropy"] = varentropy(src, base) * s * s;
    return c;
  };
  ordered_json j;
  j["log_base"] = ctx.opt.log_base == 0.0 ? base : ctx.opt.log_base;
  j["alphabet_size"] = alphabet_size(source);
  if (const auto* iid = std::get_if<IidSource>(&source)) {
    j["type"] = "iid";
    j.update(describe(*iid));
  } else {
    const auto& mix = std::get<MixedSource>(source);
    j["type"] = "mixed";
    j["weights"] = mix.weights();
    j["components"] = {describe(mix.components()[0]), describe(mix.components()[1])};
  }
  ctx.emit(j);
}

void do_source_logprob(Context& ctx) {
  const CostModel model = ctx.model();
  const Sequence x = parse_symbols(ctx.opt.x);
  ordered_json j;
  j["x"] = ctx.opt.x;
  j["log_prob"] = log_prob(ctx.source(), x, static_cast<double>(model.K())) *
                  ctx.log_scale(model.K());
  ctx.emit(j);
}

void do_source_enumerate(Context& ctx) {
  const SequenceDist dist = enumerate_support(ctx.source(), ctx.opt.n);
  std::ostringstream csv;
  csv << "sequence,probability\n";
  for (const auto& [x, p] : dist.entries) {
    csv << to_string(x, dist.alphabet_size) << ',' << format_double(p) << '\n';
  }
  ctx.emit(csv.str());
}

void do_source_sample(Context& ctx) {
  const CostModel model = ctx.model();
  if (ctx.opt.count < 1) throw ConfigError("--count must be at least 1");
  const auto info = sample_self_info(ctx.source(), ctx.opt.n, ctx.opt.count, ctx.opt.seed,
                                     static_cast<double>(model.K()), ctx.opt.workers);
  const double s = ctx.log_scale(model.K());
  std::ostringstream csv;
  csv << "self_information\n";
  for (double v : info) csv << format_double(v * s) << '\n';
  ctx.emit(csv.str());
}

void do_gaussian(Context& ctx, bool cdf) {
  std::ostringstream csv;
  csv << (cdf ? "u,cdf\n" : "p,quantile\n");
  for (double v : parse_doubles(ctx.opt.values)) {
    csv << format_double(v) << ',' << format_double(cdf ? gaussian_cdf(v) : gaussian_quantile(v))
        << '\n';
  }
  ctx.emit(csv.str());
}

void do_spectrum(Context& ctx, bool second) {
  const CostModel model = ctx.model();
  if (ctx.opt.grid.empty()) throw ConfigError("--grid is required");
  SpectrumQuery q{.source = ctx.source(), .grid = parse_grid(ctx.opt.grid)};
  q.n = ctx.opt.n;
  q.alpha_c = solve_cost_capacity(model).alpha_c;
  q.K = model.K();
  q.method = parse_spectrum_method(ctx.opt.method.empty() ? "exact" : ctx.opt.method);
  q.samples = ctx.opt.samples;
  q.seed = ctx.opt.seed;
  q.lattice_step = ctx.opt.lattice_step;
  q.workers = ctx.opt.workers;
  if (second) {
    if (ctx.opt.a) {
      q.a = *ctx.opt.a;
    } else if (const auto* iid = std::get_if<IidSource>(&q.source)) {
      q.a = entropy(*iid, static_cast<double>(model.K())) / q.alpha_c;
    } else {
      throw ConfigError("--a is required for a mixed source");
    }
  }
  ctx.emit(to_csv(second ? second_order_spectrum(q) : first_order_spectrum(q)));
}

void do_strong_converse(Context& ctx) {
  const CostModel model = ctx.model();
  const auto ns = parse_sizes(ctx.opt.n_list);
  const auto report = strong_converse_diagnostic(ctx.source(), ns, ctx.opt.delta, model.K(),
                                                 ctx.opt.samples, ctx.opt.seed, ctx.opt.workers);
  const double s = ctx.log_scale(model.K());
  ordered_json j;
  j["delta"] = report.delta;
  j["verdict"] = report.verdict;
  j["predicted_gap"] = report.predicted_gap * s;
  j["rows"] = ordered_json::array();
  for (const auto& r : report.rows) {
    j["rows"].push_back({{"n", r.n},
                         {"lower_quantile", r.lower_quantile * s},
                         {"upper_quantile", r.upper_quantile * s},
                         {"gap", r.gap * s}});
  }
  ctx.emit(j);
}

void do_code_build(Context& ctx) {
  const CostModel model = ctx.model();
  const SequenceDist dist = enumerate_support(ctx.source(), ctx.opt.n);
  BuildReport report;
  const PrefixCode code = build_exact_code(dist, model, build_options(ctx.opt), &report);
  ctx.emit(to_csv(code));
  if (!ctx.opt.report_path.empty()) {
    double worst = -INFINITY;
    for (const auto& e : code.entries()) {
      worst = std::max(worst, e.cost - certified_cost_bound(e.probability, code.alpha_c(),
                                                            model.c_max(), model.K()));
    }
    ordered_json j;
    j["n"] = code.n();
    j["codewords"] = code.entries().size();
    j["alpha_c"] = code.alpha_c();
    j["precision_bits_used"] = report.precision_bits_used;
    j["ideal_bound_fraction"] = report.ideal_bound_fraction;
    j["max_cost_minus_certified_bound"] = worst;
    j["kraft_sum"] = kraft_sum(code);
    write_file(ctx.opt.report_path, j.dump(2) + "\n");
  }
}

void do_code_random(Context& ctx) {
  const CostModel model = ctx.model();
  const SequenceDist dist = enumerate_support(ctx.source(), ctx.opt.n);
  ctx.emit(to_csv(random_prefix_code(dist, model, solve_cost_capacity(model).alpha_c,
                                     ctx.opt.seed)));
}

void do_code_encode(Context& ctx) {
  const CostModel model = ctx.model();
  const PrefixCode code = obtain_code(ctx, model, false);
  ctx.emit(to_string(code.encode(parse_symbols(ctx.opt.x)), model.K()));
}

void do_code_decode(Context& ctx) {
  const CostModel model = ctx.model();
  const PrefixCode code = obtain_code(ctx, model, false);
  ctx.emit(sequence_text(code.decode(parse_symbols(ctx.opt.w))));
}

void do_code_kraft(Context& ctx) {
  const CostModel model = ctx.model();
  const PrefixCode code = obtain_code(ctx, model, false);
  ordered_json j;
  j["codewords"] = code.entries().size();
  j["alpha_c"] = code.alpha_c();
  j["kraft_sum"] = kraft_sum(code);
  ctx.emit(j);
}

void do_overflow(Context& ctx) {
  const CostModel model = ctx.model();
  const auto values = threshold_values(ctx.opt);
  const OverflowMethod method =
      parse_overflow_method(ctx.opt.method.empty() ? "exact" : ctx.opt.method);
  std::vector<OverflowResult> results;
  if (method == OverflowMethod::surrogate_mc) {
    const Source source = ctx.source();
    const double alpha = solve_cost_capacity(model).alpha_c;
    for (double v : values) {
      results.push_back(overflow(source, model, alpha,
                                 {ctx.opt.n, threshold_of(ctx.opt, v), method, ctx.opt.samples,
                                  ctx.opt.seed, ctx.opt.workers}));
    }
  } else {
    const PrefixCode code = obtain_code(ctx, model, true);
    for (double v : values) {
      results.push_back(overflow(code, {code.n(), threshold_of(ctx.opt, v), method,
                                        ctx.opt.samples, ctx.opt.seed, ctx.opt.workers}));
    }
  }
  ctx.emit(to_csv(results));
}

void do_threshold(Context& ctx, bool second) {
  const CostModel model = ctx.model();
  const Source source = ctx.source();
  const ThresholdResult r = second ? second_order_threshold(source, model, ctx.opt.eps, ctx.opt.a)
                                   : first_order_threshold(source, model, ctx.opt.eps);
  auto j = ordered_json::parse(to_json(r));
  const double s = ctx.log_scale(model.K());
  if (s != 1.0) {
    for (auto& h : j["entropies"]) h = h.get<double>() * s;
    for (auto& sd : j["sigmas"]) sd = sd.get<double>() * s;
  }
  ctx.emit(j);
}

void do_vl2fl(Context& ctx) {
  const CostModel model = ctx.model();
  const PrefixCode code = obtain_code(ctx, model, true);
  const double eta = parse_doubles(ctx.opt.eta).front();
  const FixedLengthCode fl = vl_to_fl(code, eta);
  const double logM = fl.M > 0 ? log_base(static_cast<double>(fl.M), model.K()) : -INFINITY;
  const double s = ctx.log_scale(model.K());
  ordered_json j;
  j["n"] = fl.n;
  j["eta"] = eta;
  j["M"] = fl.M;
  j["log_M"] = fl.M > 0 ? ordered_json(logM * s) : ordered_json(nullptr);
  j["alpha_c_eta"] = code.alpha_c() * eta * s;
  j["size_bound_holds"] = fl.M == 0 || logM <= code.alpha_c() * eta;
  j["error_probability"] = fl.error_probability;
  j["members"] = ordered_json::array();
  for (const auto& x : fl.members) j["members"].push_back(sequence_text(x));
  ctx.emit(j);
}

void do_fl2vl(Context& ctx) {
  const CostModel model = ctx.model();
  const SequenceDist dist = enumerate_support(ctx.source(), ctx.opt.n);
  FixedLengthCode fl;
  fl.n = dist.n;
  const int given = !ctx.opt.members.empty() + !ctx.opt.members_file.empty() + !ctx.opt.eta.empty();
  if (given != 1) throw ConfigError("give exactly one of --members, --members-file or --eta");
  if (!ctx.opt.eta.empty()) {
    const PrefixCode code = build_exact_code(dist, model, build_options(ctx.opt));
    fl = vl_to_fl(code, parse_doubles(ctx.opt.eta).front());
  } else {
    const auto tokens = ctx.opt.members.empty() ? read_lines(read_file(ctx.opt.members_file))
                                                : split(ctx.opt.members, ',');
    for (const auto& t : tokens) fl.members.push_back(parse_symbols(t));
    std::sort(fl.members.begin(), fl.members.end());
    fl.members.erase(std::unique(fl.members.begin(), fl.members.end()), fl.members.end());
    fl.M = fl.members.size();
    const std::set<Sequence> inside(fl.members.begin(), fl.members.end());
    for (const auto& [x, p] : dist.entries) {
      if (!inside.count(x)) fl.error_probability += p;
    }
  }
  const FlagCode flag = fl_to_vl(fl, dist, model, build_options(ctx.opt));
  const std::set<Sequence> inside(fl.members.begin(), fl.members.end());
  double worst = 0.0;
  for (const auto& e : flag.code.entries()) {
    if (inside.count(e.sequence)) worst = std::max(worst, e.cost);
  }
  const OverflowResult at_cert =
      overflow(flag.code, {dist.n, OverflowThreshold::raw(flag.certificate)});
  ordered_json j;
  j["n"] = dist.n;
  j["M"] = fl.M;
  j["flag"] = flag.flag;
  j["escape"] = flag.escape;
  j["certificate"] = flag.certificate;
  j["max_cost_on_T"] = worst;
  j["certificate_holds"] = worst <= flag.certificate;
  j["fixed_length_error"] = fl.error_probability;
  j["overflow_at_certificate"] = at_cert.probability;
  j["codewords"] = ordered_json::array();
  for (const auto& e : flag.code.entries()) {
    j["codewords"].push_back({{"sequence", sequence_text(e.sequence)},
                              {"codeword", to_string(e.codeword, model.K())},
                              {"cost", e.cost},
                              {"in_T", inside.count(e.sequence) > 0}});
  }
  ctx.emit(j);
}

void do_lemma_bounds(Context& ctx) {
  const CostModel model = ctx.model();
  const Source source = ctx.source();
  if (ctx.opt.eta.empty()) throw ConfigError("--eta is required");
  const std::string m = ctx.opt.method.empty() ? "exact" : ctx.opt.method;
  BoundMethod method;
  if (m == "exact") {
    method = BoundMethod::exact;
  } else if (m == "monte-carlo" || m == "mc") {
    method = BoundMethod::monte_carlo;
  } else {
    throw ConfigError("unknown bound method '" + m + "'");
  }
  std::ostringstream csv;
  csv << "eta,z,lower_raw,upper_raw,lower,upper,lower_stderr,upper_stderr,method\n";
  for (double eta : parse_grid(ctx.opt.eta)) {
    for (double z : parse_doubles(ctx.opt.z)) {
      const LemmaBounds b = lemma_bounds(source, model, ctx.opt.n, eta, z, method,
                                         ctx.opt.samples, ctx.opt.seed, ctx.opt.workers);
      csv << format_double(eta) << ',' << format_double(z) << ',' << format_double(b.lower_raw)
          << ',' << format_double(b.upper_raw) << ',' << format_double(b.lower) << ','
          << format_double(b.upper) << ',' << format_double(b.lower_stderr) << ','
          << format_double(b.upper_stderr) << ',' << (method == BoundMethod::exact ? "exact" : "monte-carlo")
          << '\n';
    }
  }
  ctx.emit(csv.str());
}

// ---------------------------------------------------------------------------
// Parser

CLI::App* leaf(CLI::App* parent, const std::string& name, const std::string& help, Context& ctx,
               std::function<void(Context&)> action) {
  CLI::App* sub = parent->add_subcommand(name, help);
  sub->callback([&ctx, action = std::move(action)] { ctx.action = action; });
  return sub;
}

void add_source(CLI::App* sub, Options& o) {
  sub->add_option("--source", o.source_path, "source spec JSON")->required();
}
void add_costs(CLI::App* sub, Options& o) {
  sub->add_option("--costs", o.costs_path, "cost model JSON")->required();
}
void add_n(CLI::App* sub, Options& o) {
  sub->add_option("--n", o.n, "blocklength")->required()->check(CLI::PositiveNumber);
}
void add_mc(CLI::App* sub, Options& o) {
  sub->add_option("--samples", o.samples, "Monte Carlo sample count");
  sub->add_option("--seed", o.seed, "random seed");
}

std::unique_ptr<CLI::App> build_app(Context& ctx) {
  auto app = std::make_unique<CLI::App>("Source coding under unequal symbol costs", "costcode");
  Options& o = ctx.opt;
  app->require_subcommand(1);
  app->fallthrough();
  app->add_option("--output,-o", o.output, "write the result to a file instead of stdout");
  app->add_option("--log-base", o.log_base, "display logarithmic quantities in this base")
      ->check(CLI::Validator(
          [](std::string& v) {
            double b = 0.0;
            if (!CLI::detail::lexical_cast(v, b)) return std::string("must be a number");
            return b > 1.0 && std::isfinite(b) ? std::string() : "must be a finite number > 1";
          },
          "BASE>1"));
  app->add_option("--workers", o.workers, "worker threads for sampling (0 = all cores)");

  auto* cap = leaf(app.get(), "capacity", "cost capacity and symbol measure", ctx, do_capacity);
  add_costs(cap, o);

  auto* source = app->add_subcommand("source", "source model queries");
  source->require_subcommand(1);
  auto* info = leaf(source, "info", "entropy and varentropy (base K)", ctx, do_source_info);
  add_source(info, o);
  add_costs(info, o);
  auto* lp = leaf(source, "logprob", "log_K P(x)", ctx, do_source_logprob);
  add_source(lp, o);
  add_costs(lp, o);
  lp->add_option("--x", o.x, "source block, e.g. 0110")->required();
  auto* en = leaf(source, "enumerate", "full support of X^n", ctx, do_source_enumerate);
  add_source(en, o);
  add_n(en, o);
  auto* sm = leaf(source, "sample", "sampled self-information -log_K P(X^n)", ctx,
                  do_source_sample);
  add_source(sm, o);
  add_costs(sm, o);
  add_n(sm, o);
  sm->add_option("--count", o.count, "number of blocks");
  sm->add_option("--seed", o.seed, "random seed");

  auto* gauss = app->add_subcommand("gaussian", "standard normal CDF and quantile");
  gauss->require_subcommand(1);
  auto* cdf = leaf(gauss, "cdf", "Phi(u)", ctx, [](Context& c) { do_gaussian(c, true); });
  cdf->add_option("--u", o.values, "comma-separated points")->required();
  auto* qf = leaf(gauss, "quantile", "Phi^{-1}(p)", ctx, [](Context& c) { do_gaussian(c, false); });
  qf->add_option("--p", o.values, "comma-separated probabilities")->required();

  auto* spec = app->add_subcommand("spectrum", "finite-n information spectrum");
  spec->require_subcommand(1);
  for (bool second : {false, true}) {
    auto* s = leaf(spec, second ? "second" : "first",
                   second ? "Pr{(-log P - n alpha_c a)/(sqrt(n) alpha_c) >= L}"
                          : "Pr{(1/(n alpha_c)) log 1/P >= R}",
                   ctx, [second](Context& c) { do_spectrum(c, second); });
    add_source(s, o);
    add_costs(s, o);
    add_n(s, o);
    add_mc(s, o);
    s->add_option("--grid", o.grid, "thresholds: v1,v2,... or lo:hi:count")->required();
    s->add_option("--method", o.method, "exact | dp | monte-carlo");
    s->add_option("--lattice-step", o.lattice_step, "dp lattice step");
    if (second) s->add_option("--a", o.a, "first-order centre");
  }

  auto* diag = app->add_subcommand("diagnose", "spectral diagnostics");
  diag->require_subcommand(1);
  auto* sc = leaf(diag, "strong-converse", "inter-quantile gap of (1/n) log 1/P", ctx,
                  do_strong_converse);
  add_source(sc, o);
  add_costs(sc, o);
  add_mc(sc, o);
  sc->add_option("--n-list", o.n_list, "comma-separated blocklengths");
  sc->add_option("--delta", o.delta, "quantile level");

  auto* code = app->add_subcommand("code", "prefix codes");
  code->require_subcommand(1);
  auto* build = leaf(code, "build", "interval code for X^n", ctx, do_code_build);
  add_source(build, o);
  add_costs(build, o);
  add_n(build, o);
  build->add_option("--precision", o.precision, "working precision in bits");
  build->add_option("--max-precision", o.max_precision, "give up above this many bits");
  build->add_option("--report", o.report_path, "write a build report (JSON)");
  auto* rnd = leaf(code, "random", "random complete prefix code for X^n", ctx, do_code_random);
  add_source(rnd, o);
  add_costs(rnd, o);
  add_n(rnd, o);
  rnd->add_option("--seed", o.seed, "random seed");
  for (const char* name : {"encode", "decode", "kraft"}) {
    const std::string nm = name;
    auto* s = leaf(code, nm,
                   nm == "encode" ? "codeword of a block"
                   : nm == "decode" ? "block of a codeword"
                                    : "cost-weighted Kraft sum",
                   ctx,
                   nm == "encode" ? do_code_encode : nm == "decode" ? do_code_decode : do_code_kraft);
    add_costs(s, o);
    s->add_option("--table", o.table_path, "code table CSV")->required();
    if (nm == "encode") s->add_option("--x", o.x, "source block")->required();
    if (nm == "decode") s->add_option("--w", o.w, "code string")->required();
  }

  auto* ovf = leaf(app.get(), "overflow", "overflow probability Pr{c(phi(X^n)) > eta_n}", ctx,
                   do_overflow);
  add_source(ovf, o);
  add_costs(ovf, o);
  add_n(ovf, o);
  add_mc(ovf, o);
  ovf->add_option("--table", o.table_path, "evaluate this code table instead of building one");
  ovf->add_option("--method", o.method, "exact | monte-carlo | surrogate-mc");
  ovf->add_option("--R", o.R, "first-order rates (eta = nR)");
  ovf->add_option("--a", o.a, "second-order centre");
  ovf->add_option("--L", o.L, "second-order offsets (eta = na + L sqrt(n))");
  ovf->add_option("--eta", o.eta, "raw thresholds");
  ovf->add_option("--precision", o.precision, "working precision in bits");

  auto* thr = app->add_subcommand("threshold", "overflow thresholds");
  thr->require_subcommand(1);
  for (bool second : {false, true}) {
    auto* s = leaf(thr, second ? "second" : "first", second ? "L(eps, a|X)" : "R(eps|X)", ctx,
                   [second](Context& c) { do_threshold(c, second); });
    add_source(s, o);
    add_costs(s, o);
    s->add_option("--eps", o.eps, "overflow level")->required();
    if (second) s->add_option("--a", o.a, "first-order centre (checked)");
  }

  auto* eq = app->add_subcommand("equiv", "fixed-length / variable-length conversions");
  eq->require_subcommand(1);
  auto* v2f = leaf(eq, "vl2fl", "T_n = {x : c(phi(x)) <= eta}", ctx, do_vl2fl);
  add_source(v2f, o);
  add_costs(v2f, o);
  add_n(v2f, o);
  v2f->add_option("--eta", o.eta, "cost threshold")->required();
  v2f->add_option("--table", o.table_path, "code table CSV (default: interval code)");
  v2f->add_option("--precision", o.precision, "working precision in bits");
  auto* f2v = leaf(eq, "fl2vl", "flag-prefixed variable-length code from T_n", ctx, do_fl2vl);
  add_source(f2v, o);
  add_costs(f2v, o);
  add_n(f2v, o);
  f2v->add_option("--members", o.members, "comma-separated blocks of T_n");
  f2v->add_option("--members-file", o.members_file, "file with one block of T_n per line");
  f2v->add_option("--eta", o.eta, "take T_n from the interval code at this threshold");
  f2v->add_option("--precision", o.precision, "working precision in bits");

  auto* lb = leaf(app.get(), "lemma-bounds", "information-spectrum bounds on the overflow", ctx,
                  do_lemma_bounds);
  add_source(lb, o);
  add_costs(lb, o);
  add_n(lb, o);
  add_mc(lb, o);
  lb->add_option("--eta", o.eta, "thresholds: v1,v2,... or lo:hi:count")->required();
  lb->add_option("--z", o.z, "comma-separated slack values");
  lb->add_option("--method", o.method, "exact | monte-carlo");
  return app;
}

void collect_leaves(const CLI::App* app, const std::string& prefix, std::vector<std::string>& out) {
  const auto subs = app->get_subcommands({});
  if (subs.empty()) {
    out.push_back(prefix);
    return;
  }
  for (const CLI::App* s : subs) {
    collect_leaves(s, prefix.empty() ? s->get_name() : prefix + " " + s->get_name(), out);
  }
}

void error_json(std::ostream& err, const char* kind, const std::string& message, int code) {
  ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  err << j.dump() << '\n';
}

} // namespace

const std::vector<CommandEntry>& command_table() {
  static const std::vector<CommandEntry> table = {
      {"solve_cost_capacity", "capacity"},
      {"symbol_measure", "capacity"},
      {"validate_conditional_model", "capacity"},
      {"log_prob", "source logprob"},
      {"entropy", "source info"},
      {"varentropy", "source info"},
      {"sample_self_info", "source sample"},
      {"enumerate_support", "source enumerate"},
      {"gaussian_cdf", "gaussian cdf"},
      {"gaussian_quantile", "gaussian quantile"},
      {"first_order_spectrum", "spectrum first"},
      {"second_order_spectrum", "spectrum second"},
      {"strong_converse_diagnostic", "diagnose strong-converse"},
      {"build_exact_code", "code build"},
      {"random_prefix_code", "code random"},
      {"encode", "code encode"},
      {"decode", "code decode"},
      {"kraft_sum", "code kraft"},
      {"overflow", "overflow"},
      {"first_order_threshold", "threshold first"},
      {"second_order_threshold", "threshold second"},
      {"vl_to_fl", "equiv vl2fl"},
      {"fl_to_vl", "equiv fl2vl"},
      {"lemma_bounds", "lemma-bounds"},
  };
  return table;
}

std::vector<std::string> subcommand_paths() {
  Context ctx;
  const auto app = build_app(ctx);
  std::vector<std::string> out;
  for (const CLI::App* s : app->get_subcommands({})) collect_leaves(s, s->get_name(), out);
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx;
  ctx.out = &out;
  const auto app = build_app(ctx);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app->parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app->exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app->exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    error_json(err, "config_error", e.what(), kConfigError);
    return kConfigError;
  }
  try {
    if (!ctx.action) throw ConfigError("no subcommand selected");
    ctx.action(ctx);
    out.flush();
  } catch (const ConfigError& e) {
    error_json(err, "config_error", e.what(), kConfigError);
    return kConfigError;
  } catch (const NumericError& e) {
    error_json(err, "numeric_error", e.what(), kNumericError);
    return kNumericError;
  } catch (const std::exception& e) {
    error_json(err, "numeric_error", e.what(), kNumericError);
    return kNumericError;
  }
  return kOk;
}

} // namespace costcode::cli
