// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when everything passes).

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "alctrie/analysis.hpp"
#include "alctrie/lctrie.hpp"
#include "alctrie/montecarlo.hpp"
#include "alctrie/trie.hpp"
#include "oracles.hpp"

using namespace alctrie;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

ExperimentConfig config(ModelParams params, std::uint64_t trials, std::uint64_t seed) {
  ExperimentConfig c;
  c.params = params;
  c.trials = trials;
  c.seed = seed;
  return c;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Outcome oracle_equivalence() {
  Outcome o;
  std::mt19937_64 rng(20240601);
  std::size_t levels_checked = 0, queries_checked = 0;
  for (int instance = 0; instance < 100 && o.pass; ++instance) {
    const double p = std::array{0.3, 0.5, 0.7}[instance % 3];
    const auto n = static_cast<std::uint32_t>(2 + rng() % 255);
    const KeySet keys = generate_keys({p, rng()}, n);
    const Trie trie = Trie::build(keys);
    const LevelProfile& prof = trie.level_profile();
    for (std::size_t k = 0; k <= prof.levels() + 1; ++k, ++levels_checked)
      if (prof.count(k) != count_filled_oracle(keys, k)) {
        o = {false, "level profile differs at instance " + std::to_string(instance) + ", k " + std::to_string(k)};
        break;
      }
    const AlcTrie alc = AlcTrie::compress(keys, std::array{0.25, 0.5, 1.0}[instance % 3]);
    for (int q = 0; q < 1000 && o.pass; ++q, ++queries_checked) {
      BitString query;
      const std::size_t len = rng() % 24;
      const std::uint32_t near = rng() % n;
      for (std::size_t b = 0; b < len; ++b) query.push_back(q % 2 ? keys[near].bit(b) != (b + 1 == len) : rng() % 2);
      if (alc.longest_prefix_match(query) != oracle::linear_scan_lpm(keys, query))
        o = {false, "LPM differs at instance " + std::to_string(instance) + ", query " + query.to_string()};
    }
  }
  if (o.pass)
    o.detail = std::to_string(levels_checked) + " levels and " + std::to_string(queries_checked) +
               " LPM queries over 100 instances match exactly";
  return o;
}

Outcome expectation_vs_simulation() {
  const auto params = ModelParams::fixed(4096, 0.7, 0.5);
  const std::uint32_t levels[] = {4, 8, 12, 16, 20};
  Outcome o;
  double worst = 0;
  for (const FillEstimate& e : estimate_fill_fractions(config(params, 2000, 2), levels)) {
    const double diff = std::fabs(e.mean - expected_fill_fraction(params, e.k));
    const double tol = std::max(0.01, 3 * e.std_error);
    worst = std::max(worst, diff / tol);
    if (diff > tol) {
      o.pass = false;
      o.detail += fmt("k=%g diff %.3g > tol %.3g; ", e.k, diff, tol);
    }
  }
  if (o.pass) o.detail = fmt("max |diff|/tol = %.3f over k in {4,8,12,16,20}, 2000 trials", worst);
  return o;
}

Outcome poisson_closed_form() {
  double worst = 0;
  for (double lambda : {10.0, 1e3, 1e6})
    for (std::uint32_t k = 0; k <= 40; ++k) {
      const double exact = oracle::poisson_ge2_pmf(std::ldexp(lambda, -static_cast<int>(k)));
      const double got = expected_fill_fraction(ModelParams::poisson(lambda, 0.5, 0.5), k);
      worst = std::max(worst, std::fabs(got - exact));
    }
  return {worst <= 1e-12, fmt("max abs error %.3g (tolerance 1e-12)", worst)};
}

Outcome variance_bound() {
  const std::uint32_t levels[] = {8, 12};
  Outcome o;
  for (const FillEstimate& e : estimate_fill_fractions(config(ModelParams::poisson(4096, 0.7, 0.5), 2000, 4), levels)) {
    const double bound = std::ldexp(1.0, -static_cast<int>(e.k)) + 3 * e.variance_std_error;
    o.pass = o.pass && e.variance <= bound;
    o.detail += fmt("k=%g var %.3g vs bound %.3g; ", e.k, e.variance, bound);
  }
  return o;
}

Outcome two_point_concentration() {
  const FillupHistogram h = simulate_fillup(config(ModelParams::fixed(1 << 14, 0.7, 0.5), 300, 5));
  const double mass = h.top_two_mass();
  return {mass >= 0.9, fmt("top-two consecutive mass %.3f (need >= 0.9), %g distinct levels", mass,
                           static_cast<double>(h.frequencies.size()))};
}

Outcome centering() {
  Outcome o;
  const double b = std::log(1 / std::sqrt(0.21));
  for (int e : {12, 14, 16}) {
    const double n = std::ldexp(1.0, e);
    const FillupHistogram h = simulate_fillup(config(ModelParams::fixed(1ULL << e, 0.7, 0.5), 300, 6));
    const double target = std::log(n) / b;
    const double gap = std::fabs(h.mode() - target);
    o.pass = o.pass && gap <= 3;
    o.detail += fmt("n=2^%g mode %g vs %.2f; ", e, h.mode(), target);
  }
  return o;
}

Outcome alpha_shift() {
  const auto low = simulate_fillup(config(ModelParams::fixed(1 << 16, 0.7, 0.25), 300, 7));
  const auto high = simulate_fillup(config(ModelParams::fixed(1 << 16, 0.7, 0.75), 300, 7));
  const double predicted =
      predict_level_closed_form(65536, 0.25, 0.7) - predict_level_closed_form(65536, 0.75, 0.7);
  return {low.mode() >= high.mode() + 1,
          fmt("mode %g at alpha 0.25, %g at alpha 0.75 (closed-form gap %.2f)", low.mode(), high.mode(), predicted)};
}

Outcome depoissonization() {
  const auto fixed = simulate_fillup(config(ModelParams::fixed(4096, 0.7, 0.5), 300, 8));
  const auto pois = simulate_fillup(config(ModelParams::poisson(4096, 0.7, 0.5), 300, 8));
  const double tv = total_variation(fixed, pois);
  double worst = 0;
  for (std::uint32_t k = 0; k <= 40; ++k)
    worst = std::max(worst, std::fabs(expected_fill_fraction(ModelParams::poisson(4096, 0.7, 0.5), k) -
                                      expected_fill_fraction(ModelParams::fixed(4096, 0.7, 0.5), k)));
  return {tv <= 0.25 && worst <= 0.02, fmt("TV distance %.3f (<= 0.25), max |E diff| %.2e (<= 0.02)", tv, worst)};
}

Outcome depth_growth() {
  Outcome o;
  double previous_ratio = INFINITY, previous_mean = 0;
  std::string line;
  for (int e : {8, 12, 16}) {
    const DepthSummary s =
        simulate_depth(config(ModelParams::fixed(1ULL << e, 0.7, 0.5), e == 16 ? 200 : 300, 9));
    for (const DepthTrial& t : s.records)
      if (t.depth > t.trie_depth) {
        o.pass = false;
        line += "depth above trie depth at n=2^" + std::to_string(e) + "; ";
      }
    o.pass = o.pass && s.mean > previous_mean && s.mean_over_log < previous_ratio;
    line += fmt("n=2^%g mean D %.3f, D/log2 n %.4f; ", e, s.mean, s.mean_over_log);
    previous_mean = s.mean;
    previous_ratio = s.mean_over_log;
  }
  const double c_alpha = depth_constant(0.7, LcVariant::alpha_lc);
  const double c_full = depth_constant(0.7, LcVariant::full_lc);
  const bool constants_ok = std::fabs(c_alpha - 0.4537) <= 5e-4 && std::fabs(c_full - 0.9790) <= 5e-4;
  o.pass = o.pass && constants_ok;
  o.detail = line + fmt("constants %.5f (alpha-LC), %.5f (full LC)", c_alpha, c_full);
  return o;
}

Outcome self_consistency() {
  double gamma_err = 0, quantile_err = 0, symmetry_err = 0, level_gap = 0;
  for (double p : {0.55, 0.7, 0.9})
    for (std::uint32_t k : {8U, 20U, 40U})
      for (double lambda : {100.0, 1e4, 1e6}) {
        const double g = gamma_threshold(k, lambda, p);
        const double log_lhs = std::log(lambda) + g * std::log(p) + (k - g) * std::log1p(-p);
        gamma_err = std::max(gamma_err, std::fabs(std::expm1(log_lhs)));
      }
  for (double a = 1e-6; a < 1; a = a < 0.01 ? a * 10 : a + 0.01)
    quantile_err = std::max(quantile_err, std::fabs(normal_cdf(normal_quantile(a)) - a) / std::min(a, 1 - a));
  for (double p : {0.1, 0.3, 0.45})
    for (double alpha : {0.25, 0.5, 0.75})
      for (double size : {1024.0, 65536.0, 1048576.0}) {
        const double q = 1 - p;
        auto diff = [&](double x, double y) { symmetry_err = std::max(symmetry_err, std::fabs(x - y)); };
        diff(predict_level_closed_form(size, alpha, p), predict_level_closed_form(size, alpha, q));
        diff(predict_full_fillup(size, p), predict_full_fillup(size, q));
        diff(depth_constant(p, LcVariant::alpha_lc), depth_constant(q, LcVariant::alpha_lc));
        diff(depth_constant(p, LcVariant::full_lc), depth_constant(q, LcVariant::full_lc));
        diff(predict_level_calibrated(ModelParams::fixed(static_cast<std::uint64_t>(size), p, alpha)),
             predict_level_calibrated(ModelParams::fixed(static_cast<std::uint64_t>(size), q, alpha)));
        diff(predict_level_calibrated(ModelParams::poisson(size, p, alpha)),
             predict_level_calibrated(ModelParams::poisson(size, q, alpha)));
        for (std::uint32_t k : {5U, 12U, 25U})
          diff(expected_fill_fraction(ModelParams::fixed(static_cast<std::uint64_t>(size), p, alpha), k),
               expected_fill_fraction(ModelParams::fixed(static_cast<std::uint64_t>(size), q, alpha), k));
      }
  for (double alpha : {0.25, 0.5, 0.75})
    for (int e = 10; e <= 20; ++e) {
      const double n = std::ldexp(1.0, e);
      const double k = predict_level_calibrated(ModelParams::fixed(1ULL << e, 0.7, alpha));
      level_gap = std::max(level_gap, std::fabs(k - predict_level_closed_form(n, alpha, 0.7)));
    }
  const bool pass = gamma_err <= 1e-9 && quantile_err <= 1e-8 && symmetry_err <= 1e-12 && level_gap <= 3;
  return {pass, fmt("gamma root err %.2e, quantile round trip %.2e, p<->q %.2e, max |calibrated - closed| %.2f",
                    gamma_err, quantile_err, symmetry_err, level_gap)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"expectation vs simulation", expectation_vs_simulation},
      {"poisson closed form at p=1/2", poisson_closed_form},
      {"variance bound", variance_bound},
      {"two-point concentration", two_point_concentration},
      {"centering at alpha=0.5", centering},
      {"alpha shift direction", alpha_shift},
      {"depoissonization", depoissonization},
      {"depth invariant and growth", depth_growth},
      {"analysis self-consistency", self_consistency},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    while (!o.detail.empty() && (o.detail.back() == ' ' || o.detail.back() == ';')) o.detail.pop_back();
    std::printf("%s %2zu %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
