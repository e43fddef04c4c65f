#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "alctrie/analysis.hpp"
#include "alctrie/report.hpp"

namespace alctrie {

struct ExperimentConfig {
  ModelParams params;
  std::uint64_t trials = 100;
  std::uint64_t seed = 1;
  /// Worker threads; 0 means one per hardware thread. Output never depends on it.
  unsigned jobs = 0;

  /// Throws std::invalid_argument on invalid parameters or zero trials.
  void validate() const;
};

/// Seed of the key set used by trial `trial`.
std::uint64_t trial_key_seed(std::uint64_t seed, std::uint64_t trial) noexcept;

struct FillupTrial {
  std::uint64_t trial = 0;
  std::uint64_t n_effective = 0;
  /// Empty when the trial had fewer than two keys.
  std::optional<std::uint32_t> level;
};

struct FillupHistogram {
  /// alpha-fillup level -> number of trials.
  std::map<std::uint32_t, std::uint64_t> frequencies;
  std::uint64_t trials = 0;
  /// Poisson trials with fewer than two keys; frequencies + undefined = trials.
  std::uint64_t undefined = 0;
  std::vector<FillupTrial> records;

  std::uint64_t defined() const noexcept { return trials - undefined; }
  /// Largest share of defined trials landing on two consecutive levels.
  double top_two_mass() const;
  /// Most frequent level; the smaller one on ties.
  std::uint32_t mode() const;
  /// Frequencies as a probability distribution over defined trials.
  std::map<std::uint32_t, double> distribution() const;
};

FillupHistogram simulate_fillup(const ExperimentConfig& config);

double total_variation(const FillupHistogram& a, const FillupHistogram& b);

struct DepthTrial {
  std::uint64_t trial = 0;
  std::uint64_t n = 0;
  /// Depth of key 0 in the alpha-LC trie.
  std::uint32_t depth = 0;
  std::uint32_t consumed_total = 0;
  /// Depth of key 0 in the uncompressed trie.
  std::uint32_t trie_depth = 0;
};

struct DepthSummary {
  std::uint64_t n = 0;
  std::uint64_t trials = 0;
  double mean = 0.0;
  double variance = 0.0;
  double min = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, q90 = 0.0, max = 0.0;
  /// mean / log2 log2 n (NaN when n < 4).
  double mean_over_loglog = 0.0;
  /// mean / log2 n.
  double mean_over_log = 0.0;
  std::vector<DepthTrial> records;
};

/// Compresses n random keys per trial and records the depth of key 0.
/// Fixed-size model only.
DepthSummary simulate_depth(const ExperimentConfig& config);

struct FillEstimate {
  std::uint32_t k = 0;
  std::uint64_t trials = 0;
  double mean = 0.0;
  double std_error = 0.0;
  /// Sample variance of X_k / 2^k across trials, and its standard error.
  double variance = 0.0;
  double variance_std_error = 0.0;
};

/// Monte Carlo mean of X_k / 2^k for every requested level, one trie per
/// trial. Poisson trials with fewer than two keys contribute zeros.
std::vector<FillEstimate> estimate_fill_fractions(const ExperimentConfig& config,
                                                  std::span<const std::uint32_t> levels);
FillEstimate estimate_fill_fraction(const ExperimentConfig& config, std::uint32_t k);

/// Uniform double in [0,1) from the top 53 bits of a 64-bit generator.
template <class Rng>
double uniform01(Rng& rng) {
  static_assert(Rng::min() == 0 && Rng::max() == std::numeric_limits<std::uint64_t>::max(),
                "uniform01 needs a full-range 64-bit generator");
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Exact Poisson draw: inversion for lambda <= 30, Hormann's transformed
/// rejection (PTRS) above. Deterministic given the generator state.
template <class Rng>
std::uint64_t poisson_sample(double lambda, Rng& rng) {
  if (!(lambda > 0.0)) return 0;
  if (lambda <= 30.0) {
    const double u = uniform01(rng);
    double prob = std::exp(-lambda);
    double cdf = prob;
    std::uint64_t k = 0;
    while (u > cdf && k < 1000) {
      ++k;
      prob *= lambda / static_cast<double>(k);
      cdf += prob;
    }
    return k;
  }
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    const double u = uniform01(rng) - 0.5;
    const double v = uniform01(rng);
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -lambda + k * loglam - std::lgamma(k + 1.0))
      return static_cast<std::uint64_t>(k);
  }
}

/// Columns k, mc_mean, stderr, analytic, diff.
Table expectation_report(const ExperimentConfig& config, std::span<const std::uint32_t> levels);

/// One row per (size, alpha): trials, undefined, mode, top_two_mass,
/// closed_form, calibrated, diff (mode - calibrated).
Table fillup_sweep_report(const ExperimentConfig& base, std::span<const double> sizes,
                          std::span<const double> alphas);

/// One row per n: depth statistics next to the log log n predictions.
Table depth_sweep_report(const ExperimentConfig& base, std::span<const double> sizes);

/// Per-trial rows (trial, n_effective, F).
Table fillup_trials_table(const FillupHistogram& histogram);
/// Per-trial rows (trial, n, D, consumed_total).
Table depth_trials_table(const DepthSummary& summary);

}  // namespace alctrie
