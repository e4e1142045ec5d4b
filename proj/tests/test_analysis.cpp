#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "costcode/analysis.hpp"
#include "costcode/error.hpp"
#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"

using namespace costcode;

namespace {

const IidSource bern05 = IidSource::bernoulli(0.5);
const IidSource bern025 = IidSource::bernoulli(0.25);
const IidSource bern03 = IidSource::bernoulli(0.3);
const IidSource bern011 = IidSource::bernoulli(0.11);
const MixedSource two_peak_mix({0.4, 0.6}, {bern05, bern011});
const CostModel unit(2, {1, 1});
const CostModel golden(2, {1, 2});

} // namespace

TEST_CASE("first-order threshold, i.i.d.") {
  for (double eps : {0.0, 0.1, 0.5, 0.99}) {
    CHECK(first_order_threshold(bern05, unit, eps).value == 1.0);
  }
  const auto r = first_order_threshold(bern05, golden, 0.3);
  CHECK(r.value == doctest::Approx(1.0 / static_cast<double>(oracle::cost_capacity(2, {1, 2})))
                       .epsilon(1e-12));
  CHECK(r.value == doctest::Approx(1.44042).epsilon(1e-5));
  CHECK(r.case_label == ThresholdCase::iid);
  CHECK_THROWS_AS(first_order_threshold(bern05, unit, 1.0), ConfigError);
  CHECK_THROWS_AS(first_order_threshold(bern05, unit, -0.1), ConfigError);
  CHECK_THROWS_AS(first_order_threshold(IidSource::bernoulli(1.0), unit, 0.1), ConfigError);
}

TEST_CASE("first-order threshold, mixed") {
  const auto low = first_order_threshold(two_peak_mix, unit, 0.2);
  CHECK(low.value == 1.0);
  CHECK(low.case_label == ThresholdCase::mixed_II);
  const auto high = first_order_threshold(two_peak_mix, unit, 0.7);
  CHECK(high.value ==
        doctest::Approx(static_cast<double>(oracle::entropy({0.89, 0.11}, 2))).epsilon(1e-12));
  CHECK(high.value == doctest::Approx(0.499916).epsilon(1e-6));
  CHECK(high.case_label == ThresholdCase::mixed_III);
  CHECK_THROWS_AS(first_order_threshold(two_peak_mix, unit, 0.4), ConfigError);

  // Listing the lower-entropy component first is undone by the internal swap.
  const MixedSource flipped({0.6, 0.4}, {bern011, bern05});
  const auto f = first_order_threshold(flipped, unit, 0.2);
  CHECK(f.swapped);
  CHECK(f.value == 1.0);
  CHECK(f.weights == std::vector<double>{0.4, 0.6});
  CHECK_THROWS_AS(first_order_threshold(flipped, unit, 0.4), ConfigError);
  CHECK_NOTHROW(first_order_threshold(flipped, unit, 0.6));
}

TEST_CASE("second-order threshold, i.i.d.") {
  for (double eps : {0.1, 0.5, 0.9}) {
    CHECK(second_order_threshold(bern05, golden, eps).value == 0.0);
  }
  CHECK(second_order_threshold(bern025, golden, 0.5).value == 0.0);
  const double alpha = static_cast<double>(oracle::cost_capacity(2, {1, 2}));
  const double sigma = std::sqrt(static_cast<double>(oracle::varentropy({0.75, 0.25}, 2)));
  for (double eps : {0.01, 0.1, 0.3, 0.9}) {
    const auto r = second_order_threshold(bern025, golden, eps);
    const double expected = sigma / alpha * static_cast<double>(oracle::phi_inverse(1 - eps));
    CHECK(r.value == doctest::Approx(expected).epsilon(1e-9));
  }
  const double a = entropy(bern025, 2) / solve_cost_capacity(golden).alpha_c;
  CHECK_NOTHROW(second_order_threshold(bern025, golden, 0.2, a));
  CHECK_THROWS_AS(second_order_threshold(bern025, golden, 0.2, a + 1e-3), ConfigError);
  CHECK_THROWS_AS(second_order_threshold(bern025, golden, 0.0), ConfigError);
  CHECK_THROWS_AS(second_order_threshold(bern025, golden, 1.0), ConfigError);
}

TEST_CASE("second-order Case III matches the algebraic rearrangement") {
  const MixedSource m({0.4, 0.6}, {bern05, bern011});
  const double sigma2 = std::sqrt(static_cast<double>(oracle::varentropy({0.89, 0.11}, 2)));
  for (const CostModel& model : {unit, golden}) {
    const double alpha = static_cast<double>(oracle::cost_capacity(2, model.costs()));
    for (double eps : {0.5, 0.8, 0.95}) {
      const auto r = second_order_threshold(m, model, eps);
      const double expected =
          sigma2 / alpha * static_cast<double>(oracle::phi_inverse(1 - (eps - 0.4) / 0.6));
      CHECK(r.case_label == ThresholdCase::mixed_III);
      CHECK(std::abs(r.value - expected) <= 1e-8);
      CHECK(r.residual <= 1e-8);
      CHECK(r.root_solved);
      CHECK(r.a == doctest::Approx(entropy(bern011, 2) / alpha));
    }
  }
  const auto r = second_order_threshold(m, unit, 0.8);
  CHECK(r.value == doctest::Approx(-0.43073 * sigma2).epsilon(1e-4));
}

TEST_CASE("second-order Case II matches the algebraic rearrangement") {
  const MixedSource m({0.7, 0.3}, {bern03, bern011});
  const double s1 = std::sqrt(static_cast<double>(oracle::varentropy({0.7, 0.3}, 2)));
  for (double eps : {0.05, 0.3, 0.6}) {
    const auto r = second_order_threshold(m, golden, eps);
    const double alpha = solve_cost_capacity(golden).alpha_c;
    const double expected = s1 / alpha * static_cast<double>(oracle::phi_inverse(1 - eps / 0.7));
    CHECK(r.case_label == ThresholdCase::mixed_II);
    CHECK(std::abs(r.value - expected) <= 1e-8);
    CHECK(r.residual <= 1e-8);
  }
}

TEST_CASE("second-order Case I with equal entropies") {
  // Bern(0.3) and Bern(0.7) share H and sigma, so G(T) = 1 - Phi(T alpha / sigma).
  const MixedSource m({0.35, 0.65}, {bern03, IidSource::bernoulli(0.7)});
  const double sigma = std::sqrt(static_cast<double>(oracle::varentropy({0.7, 0.3}, 2)));
  for (double eps : {0.1, 0.35, 0.8}) {
    const auto r = second_order_threshold(m, unit, eps);
    CHECK(r.case_label == ThresholdCase::mixed_I);
    CHECK(std::abs(r.value - sigma * static_cast<double>(oracle::phi_inverse(1 - eps))) <= 1e-8);
  }
}

TEST_CASE("second-order with a zero-variance component is a step") {
  // Case II through Bern(0.5): G(T) = w1 for T < 0 and 0 for T >= 0.
  const auto r = second_order_threshold(two_peak_mix, unit, 0.2);
  CHECK(r.case_label == ThresholdCase::mixed_step);
  CHECK(std::abs(r.value) <= 1e-12);
  CHECK(r.residual <= 1e-8);
  // Case III through a lower-entropy component that is uniform on its support.
  const MixedSource m({0.3, 0.7}, {IidSource({0.5, 0.3, 0.2}), IidSource({0.5, 0.5, 0.0})});
  const auto s = second_order_threshold(m, unit, 0.5);
  CHECK(s.case_label == ThresholdCase::mixed_step);
  CHECK(std::abs(s.value) <= 1e-12);
}

TEST_CASE("case classification is exhaustive and exclusive") {
  auto rng = std::mt19937_64(8);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int t = 0; t < 500; ++t) {
    const double w = u(rng), eps = u(rng);
    if (eps == w) continue;
    const MixedSource m({w, 1 - w}, {bern03, bern011});
    const auto r = second_order_threshold(m, unit, eps);
    CHECK(r.case_label == (eps < w ? ThresholdCase::mixed_II : ThresholdCase::mixed_III));
    CHECK(admissible_center(m, unit, eps) ==
          (eps < w ? entropy(bern03, 2) : entropy(bern011, 2)));
  }
}

TEST_CASE("threshold JSON echoes inputs") {
  const auto j = nlohmann::json::parse(to_json(second_order_threshold(two_peak_mix, unit, 0.8)));
  CHECK(j["kind"] == "second-order");
  CHECK(j["case"] == "mixed-III");
  CHECK(j["eps"] == 0.8);
  CHECK(j["weights"][0] == 0.4);
  CHECK(j.contains("residual"));
  CHECK(j.contains("alpha_c"));
  CHECK(j["entropies"].size() == 2);
}

TEST_CASE("vl_to_fl") {
  const auto dist = enumerate_support(bern025, 6);
  const auto code = build_exact_code(dist, golden);
  const auto all = vl_to_fl(code, code.max_cost());
  CHECK(all.M == dist.entries.size());
  CHECK(all.error_probability == 0.0);
  const auto none = vl_to_fl(code, code.min_cost() * 0.99);
  CHECK(none.M == 0);
  CHECK(none.error_probability == doctest::Approx(1.0).epsilon(1e-12));

  const double alpha = code.alpha_c();
  const double eta = 6 * entropy(bern025, 2) / alpha;
  const auto fl = vl_to_fl(code, eta);
  CHECK(std::log2(static_cast<double>(fl.M)) <= alpha * eta);
  CHECK(fl.error_probability == overflow(code, {6, OverflowThreshold::raw(eta)}).probability);
  for (double e = 1; e < code.max_cost() + 1; e += 0.5) {
    const auto f = vl_to_fl(code, e);
    if (f.M > 0) CHECK(std::log2(static_cast<double>(f.M)) <= alpha * e);
  }
}

TEST_CASE("fl_to_vl") {
  SUBCASE("full support of a uniform source") {
    const auto dist = enumerate_support(bern05, 4);
    FixedLengthCode fl{4, {}, 0, 0.0};
    for (const auto& e : dist.entries) fl.members.push_back(e.first);
    fl.M = fl.members.size();
    const auto fc = fl_to_vl(fl, dist, golden);
    CHECK(overflow(fc.code, {4, OverflowThreshold::raw(fc.certificate)}).probability == 0.0);
  }
  SUBCASE("a single member") {
    const auto dist = enumerate_support(bern03, 3);
    const FixedLengthCode fl{3, {Sequence{0, 0, 0}}, 1, 1 - 0.343};
    const auto fc = fl_to_vl(fl, dist, golden);
    CHECK(fc.code.encode(Sequence{0, 0, 0}) == Codeword{fc.flag, golden.cheapest_symbol()});
    CHECK(fc.flag == 0);
    CHECK(fc.escape == 1);
    for (const auto& e : fc.code.entries()) {
      if (e.sequence != Sequence{0, 0, 0}) CHECK(e.codeword.front() == fc.escape);
    }
  }
  SUBCASE("round trip through vl_to_fl on Bernoulli(0.3), n = 6") {
    const auto dist = enumerate_support(bern03, 6);
    const auto code = build_exact_code(dist, golden);
    const double alpha = code.alpha_c();
    for (double R : {0.9, 1.1, 1.3, 1.5}) {
      const double eta = 6 * R;
      const auto fl = vl_to_fl(code, eta);
      if (fl.M == 0) continue;
      CHECK(fl.error_probability == overflow(code, {6, OverflowThreshold::raw(eta)}).probability);
      const auto fc = fl_to_vl(fl, dist, golden);
      const std::set<Sequence> inside(fl.members.begin(), fl.members.end());
      for (const auto& e : fc.code.entries()) {
        CHECK(fc.code.decode(e.codeword) == e.sequence);
        if (inside.count(e.sequence)) CHECK(e.cost <= fc.certificate + 1e-9);
      }
      const double expected_cert = std::log2(static_cast<double>(fl.M)) / alpha + 1 / alpha +
                                   2 * 2.0 + 1.0 + 2.0;
      CHECK(fc.certificate == doctest::Approx(expected_cert).epsilon(1e-12));
      const auto again = vl_to_fl(fc.code, fc.certificate);
      CHECK(again.error_probability <= fl.error_probability + 1e-12);
      CHECK(kraft_sum(fc.code) <= 1.0 + 1e-9);
    }
  }
  const auto dist = enumerate_support(bern03, 2);
  CHECK_THROWS_AS(fl_to_vl(FixedLengthCode{2, {}, 0, 1.0}, dist, golden), ConfigError);
  CHECK_THROWS_AS(fl_to_vl(FixedLengthCode{2, {Sequence{0, 2}}, 1, 0.0}, dist, golden), ConfigError);
}

TEST_CASE("lemma bounds") {
  const CostModel m = unit;
  SUBCASE("limits") {
    const auto far = lemma_bounds(bern025, m, 6, 1e6, 0.1);
    CHECK(far.lower_raw == doctest::Approx(-0.1));
    CHECK(far.lower == 0.0);
    const auto near = lemma_bounds(bern025, m, 6, 1e-9, 0.1);
    CHECK(near.upper_raw >= 1.0);
    CHECK(near.upper == 1.0);
  }
  SUBCASE("brute force, Bernoulli(0.25), n = 8") {
    const double eta = 8 * 0.9, z = 0.01;
    const auto b = lemma_bounds(bern025, m, 8, eta, z);
    oracle::Real lower = 0, upper = 0;
    for (const auto& blk : oracle::all_blocks({{0.75, 0.25}}, {1.0}, 8)) {
      if (blk.p <= z * std::pow(2.0L, -eta)) lower += blk.p;
      if (z * blk.p <= std::pow(2.0L, -(eta - 1))) upper += blk.p;
    }
    CHECK(b.lower_raw == doctest::Approx(static_cast<double>(lower - z)).epsilon(1e-12));
    CHECK(b.upper_raw == doctest::Approx(static_cast<double>(upper + z * 4)).epsilon(1e-12));
  }
  SUBCASE("monte-carlo agrees with exact") {
    const auto ex = lemma_bounds(bern03, golden, 8, 9.0, 0.1);
    const auto mc = lemma_bounds(bern03, golden, 8, 9.0, 0.1, BoundMethod::monte_carlo, 100000, 2);
    CHECK(std::abs(mc.lower_raw - ex.lower_raw) <= 4 * mc.lower_stderr + 1e-12);
    CHECK(std::abs(mc.upper_raw - ex.upper_raw) <= 4 * mc.upper_stderr + 1e-12);
  }
  SUBCASE("sandwich around the built code") {
    for (const Source& src : std::vector<Source>{bern025, two_peak_mix}) {
      for (std::size_t n = 1; n <= 6; ++n) {
        const auto dist = enumerate_support(src, n);
        const auto code = build_exact_code(dist, golden);
        for (double eta = 0.5; eta <= code.max_cost() + 1; eta += 0.5) {
          const double p = overflow(code, {n, OverflowThreshold::raw(eta)}).probability;
          for (double z : {0.1, 0.01}) {
            const auto b = lemma_bounds(dist, golden, code.alpha_c(), eta, z);
            CHECK(b.lower_raw <= p + 1e-12);
            CHECK(p <= b.upper_raw + 1e-12);
          }
        }
      }
    }
  }
  CHECK_THROWS_AS(lemma_bounds(bern025, m, 4, 3.0, 0.0), ConfigError);
}
