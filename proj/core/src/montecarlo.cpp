#include "alctrie/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include "alctrie/lctrie.hpp"
#include "alctrie/source.hpp"
#include "alctrie/trie.hpp"

namespace alctrie {

namespace {

constexpr std::uint64_t kPoissonStream = 0x706f6973736f6eULL;

/// Runs fn(trial) for every trial. Each call writes only its own slot, so
/// results do not depend on the number of workers.
template <class Fn>
void run_trials(std::uint64_t trials, unsigned jobs, Fn&& fn) {
  if (jobs == 0) jobs = std::max(1U, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::uint64_t>(jobs, trials));
  if (jobs <= 1) {
    for (std::uint64_t t = 0; t < trials; ++t) fn(t);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::uint64_t error_trial = trials;
  std::vector<std::jthread> workers;
  workers.reserve(jobs);
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::uint64_t t; (t = next.fetch_add(1)) < trials;) {
        try {
          fn(t);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (t < error_trial) {
            error_trial = t;
            error = std::current_exception();
          }
          next.store(trials);
        }
      }
    });
  }
  workers.clear();
  if (error) std::rethrow_exception(error);
}

/// Number of keys for a trial: n, or a Poisson(lambda) draw.
std::uint64_t trial_size(const ExperimentConfig& config, std::uint64_t trial) {
  if (config.params.model == SizeModel::fixed) return static_cast<std::uint64_t>(config.params.size);
  std::mt19937_64 rng(derive_seed(trial_key_seed(config.seed, trial), kPoissonStream));
  return poisson_sample(config.params.size, rng);
}

KeySet trial_keys(const ExperimentConfig& config, std::uint64_t trial, std::uint64_t n) {
  if (n > std::numeric_limits<std::uint32_t>::max()) throw std::invalid_argument("too many keys");
  return generate_keys({config.params.p, trial_key_seed(config.seed, trial)},
                       static_cast<std::uint32_t>(n));
}

double quantile_sorted(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) return std::nan("");
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

void ExperimentConfig::validate() const {
  params.validate();
  if (trials == 0) throw std::invalid_argument("trials must be at least 1");
}

std::uint64_t trial_key_seed(std::uint64_t seed, std::uint64_t trial) noexcept {
  return derive_seed(seed, trial);
}

double FillupHistogram::top_two_mass() const {
  if (defined() == 0) return 0.0;
  std::uint64_t best = 0;
  for (const auto& [level, count] : frequencies) {
    auto it = frequencies.find(level + 1);
    best = std::max(best, count + (it == frequencies.end() ? 0 : it->second));
  }
  return static_cast<double>(best) / static_cast<double>(defined());
}

std::uint32_t FillupHistogram::mode() const {
  std::uint32_t mode = 0;
  std::uint64_t best = 0;
  for (const auto& [level, count] : frequencies) {
    if (count > best) {
      best = count;
      mode = level;
    }
  }
  return mode;
}

std::map<std::uint32_t, double> FillupHistogram::distribution() const {
  std::map<std::uint32_t, double> out;
  if (defined() == 0) return out;
  for (const auto& [level, count] : frequencies)
    out[level] = static_cast<double>(count) / static_cast<double>(defined());
  return out;
}

FillupHistogram simulate_fillup(const ExperimentConfig& config) {
  config.validate();
  const double alpha = config.params.alpha;
  if (config.params.model == SizeModel::fixed && config.params.size < 2.0)
    throw std::invalid_argument("fillup simulation needs n >= 2");

  FillupHistogram hist;
  hist.trials = config.trials;
  hist.records.resize(config.trials);
  run_trials(config.trials, config.jobs, [&](std::uint64_t t) {
    FillupTrial& rec = hist.records[t];
    rec.trial = t;
    rec.n_effective = trial_size(config, t);
    if (rec.n_effective < 2) return;
    const Trie trie = Trie::build(trial_keys(config, t, rec.n_effective));
    rec.level = static_cast<std::uint32_t>(alpha_fillup_level(trie.level_profile(), alpha));
  });
  for (const FillupTrial& rec : hist.records) {
    if (rec.level)
      ++hist.frequencies[*rec.level];
    else
      ++hist.undefined;
  }
  return hist;
}

double total_variation(const FillupHistogram& a, const FillupHistogram& b) {
  const auto da = a.distribution();
  const auto db = b.distribution();
  double sum = 0.0;
  for (const auto& [level, pa] : da) {
    auto it = db.find(level);
    sum += std::fabs(pa - (it == db.end() ? 0.0 : it->second));
  }
  for (const auto& [level, pb] : db)
    if (!da.contains(level)) sum += pb;
  return 0.5 * sum;
}

DepthSummary simulate_depth(const ExperimentConfig& config) {
  config.validate();
  if (config.params.model != SizeModel::fixed)
    throw std::invalid_argument("depth simulation uses the fixed-size model");
  if (config.params.size < 2.0) throw std::invalid_argument("depth simulation needs n >= 2");
  const auto n = static_cast<std::uint64_t>(config.params.size);

  DepthSummary s;
  s.n = n;
  s.trials = config.trials;
  s.records.resize(config.trials);
  run_trials(config.trials, config.jobs, [&](std::uint64_t t) {
    KeySet keys = trial_keys(config, t, n);
    const std::uint32_t trie_depth = Trie::build(keys).external_depth(0);
    const AlcTrie alc = AlcTrie::compress(std::move(keys), config.params.alpha);
    const DepthSample d = alc.depth(0);
    s.records[t] = {t, n, d.depth, d.consumed_total, trie_depth};
  });

  std::vector<double> depths;
  depths.reserve(s.records.size());
  for (const DepthTrial& r : s.records) depths.push_back(r.depth);
  double sum = 0.0;
  for (double d : depths) sum += d;
  s.mean = sum / static_cast<double>(depths.size());
  double sq = 0.0;
  for (double d : depths) sq += (d - s.mean) * (d - s.mean);
  s.variance = depths.size() > 1 ? sq / static_cast<double>(depths.size() - 1) : 0.0;
  std::sort(depths.begin(), depths.end());
  s.min = depths.front();
  s.max = depths.back();
  s.q25 = quantile_sorted(depths, 0.25);
  s.median = quantile_sorted(depths, 0.5);
  s.q75 = quantile_sorted(depths, 0.75);
  s.q90 = quantile_sorted(depths, 0.9);
  const double log_n = std::log2(static_cast<double>(n));
  s.mean_over_log = s.mean / log_n;
  s.mean_over_loglog = log_n > 1.0 ? s.mean / std::log2(log_n) : std::nan("");
  return s;
}

std::vector<FillEstimate> estimate_fill_fractions(const ExperimentConfig& config,
                                                  std::span<const std::uint32_t> levels) {
  config.validate();
  const std::size_t nk = levels.size();
  std::vector<double> samples(config.trials * nk, 0.0);
  run_trials(config.trials, config.jobs, [&](std::uint64_t t) {
    const std::uint64_t n = trial_size(config, t);
    if (n < 2) return;  // no filled node anywhere
    const Trie trie = Trie::build(trial_keys(config, t, n));
    const LevelProfile& profile = trie.level_profile();
    for (std::size_t i = 0; i < nk; ++i) samples[t * nk + i] = profile.fraction(levels[i]);
  });

  std::vector<FillEstimate> out;
  const auto m = static_cast<double>(config.trials);
  for (std::size_t i = 0; i < nk; ++i) {
    FillEstimate e;
    e.k = levels[i];
    e.trials = config.trials;
    double sum = 0.0;
    for (std::uint64_t t = 0; t < config.trials; ++t) sum += samples[t * nk + i];
    e.mean = sum / m;
    double m2 = 0.0, m4 = 0.0;
    for (std::uint64_t t = 0; t < config.trials; ++t) {
      const double d = samples[t * nk + i] - e.mean;
      m2 += d * d;
      m4 += d * d * d * d;
    }
    if (config.trials > 1) {
      e.variance = m2 / (m - 1.0);
      e.std_error = std::sqrt(e.variance / m);
      // Var(s^2) ~ (mu4 - sigma^4 (m-3)/(m-1)) / m
      const double mu4 = m4 / m;
      const double var_of_var = (mu4 - e.variance * e.variance * (m - 3.0) / (m - 1.0)) / m;
      e.variance_std_error = std::sqrt(std::max(0.0, var_of_var));
    }
    out.push_back(e);
  }
  return out;
}

FillEstimate estimate_fill_fraction(const ExperimentConfig& config, std::uint32_t k) {
  const std::uint32_t levels[] = {k};
  return estimate_fill_fractions(config, levels).front();
}

Table expectation_report(const ExperimentConfig& config, std::span<const std::uint32_t> levels) {
  Table table{{"k", "mc_mean", "stderr", "analytic", "diff"}, {}};
  if (levels.empty()) return table;
  for (const FillEstimate& e : estimate_fill_fractions(config, levels)) {
    const double analytic = expected_fill_fraction(config.params, e.k);
    table.add_row({std::int64_t{e.k}, e.mean, e.std_error, analytic, e.mean - analytic});
  }
  return table;
}

Table fillup_sweep_report(const ExperimentConfig& base, std::span<const double> sizes,
                          std::span<const double> alphas) {
  Table table{{"model", "n_or_lambda", "p", "alpha", "trials", "undefined", "mode",
               "top_two_mass", "closed_form", "calibrated", "diff"},
              {}};
  for (double size : sizes) {
    for (double alpha : alphas) {
      ExperimentConfig config = base;
      config.params.size = size;
      config.params.alpha = alpha;
      const FillupHistogram hist = simulate_fillup(config);
      Cell closed, calibrated, diff;
      if (alpha < 1.0 && size > 1.0) {
        closed = predict_level_closed_form(size, alpha, config.params.p);
        try {
          const auto k = predict_level_calibrated(config.params);
          calibrated = std::int64_t{k};
          diff = static_cast<std::int64_t>(hist.mode()) - static_cast<std::int64_t>(k);
        } catch (const std::domain_error&) {
        }
      }
      table.add_row({std::string(config.params.model == SizeModel::fixed ? "fixed" : "poisson"),
                     size, config.params.p, alpha, static_cast<std::int64_t>(hist.trials),
                     static_cast<std::int64_t>(hist.undefined),
                     hist.defined() ? Cell{std::int64_t{hist.mode()}} : Cell{},
                     hist.top_two_mass(), closed, calibrated, diff});
    }
  }
  return table;
}

Table depth_sweep_report(const ExperimentConfig& base, std::span<const double> sizes) {
  Table table{{"n", "p", "alpha", "trials", "mean", "variance", "median", "q90", "max",
               "mean_over_log", "mean_over_loglog", "predicted_alpha_lc", "predicted_full_lc"},
              {}};
  for (double size : sizes) {
    ExperimentConfig config = base;
    config.params.size = size;
    const DepthSummary s = simulate_depth(config);
    Cell alpha_lc, full_lc;
    const double log_n = std::log2(size);
    if (config.params.p != 0.5 && log_n > 1.0) {
      alpha_lc = depth_constant(config.params.p, LcVariant::alpha_lc) * std::log2(log_n);
      full_lc = depth_constant(config.params.p, LcVariant::full_lc) * std::log2(log_n);
    }
    table.add_row({static_cast<std::int64_t>(s.n), config.params.p, config.params.alpha,
                   static_cast<std::int64_t>(s.trials), s.mean, s.variance, s.median, s.q90, s.max,
                   s.mean_over_log, s.mean_over_loglog, alpha_lc, full_lc});
  }
  return table;
}

Table fillup_trials_table(const FillupHistogram& histogram) {
  Table table{{"trial", "n_effective", "F"}, {}};
  for (const FillupTrial& r : histogram.records)
    table.add_row({static_cast<std::int64_t>(r.trial), static_cast<std::int64_t>(r.n_effective),
                   r.level ? Cell{std::int64_t{*r.level}} : Cell{}});
  return table;
}

Table depth_trials_table(const DepthSummary& summary) {
  Table table{{"trial", "n", "D", "consumed_total"}, {}};
  for (const DepthTrial& r : summary.records)
    table.add_row({static_cast<std::int64_t>(r.trial), static_cast<std::int64_t>(r.n),
                   std::int64_t{r.depth}, std::int64_t{r.consumed_total}});
  return table;
}

}  // namespace alctrie
