#pragma once

#include <cstdint>

namespace alctrie {

enum class SizeModel { fixed, poisson };

/// Source bias, fillup fraction and the number of strings, either a fixed
/// count n or a Poisson(lambda) count.
struct ModelParams {
  double p = 0.5;
  double alpha = 0.5;
  SizeModel model = SizeModel::fixed;
  /// n for the fixed model, lambda for the Poisson model.
  double size = 2.0;

  static ModelParams fixed(std::uint64_t n, double p, double alpha) {
    return {p, alpha, SizeModel::fixed, static_cast<double>(n)};
  }
  static ModelParams poisson(double lambda, double p, double alpha) {
    return {p, alpha, SizeModel::poisson, lambda};
  }

  double q() const noexcept { return 1.0 - p; }
  /// Throws std::invalid_argument on p outside (0,1), alpha outside (0,1],
  /// a non-integral or negative n, or a non-positive lambda.
  void validate() const;
};

/// Entropies and ratios of a memoryless source (logs base 2).
struct DerivedConstants {
  double h = 0.0;      ///< Shannon entropy
  double h_inf = 0.0;  ///< Renyi entropy of infinite order, log(1/min(p,q))
  double b = 0.0;      ///< log(1/sqrt(pq))
  double kappa = 0.0;  ///< h / b
  double rho = 0.0;    ///< p / q
};

/// P(Po(mu) >= 2) = 1 - (1 + mu) e^{-mu}.
double prob_poisson_ge2(double mu);

/// P(Bin(n, q) >= 2).
double prob_binomial_ge2(std::uint64_t n, double q);

/// log of the binomial coefficient C(k, j).
double log_binomial(std::uint32_t k, std::uint32_t j);

/// lambda p^j q^(k-j): mean number of Poisson strings under a prefix with j ones.
double mu_j(double lambda, std::uint32_t k, std::uint32_t j, double p);

/// E[X_k / 2^k] under either size model.
double expected_fill_fraction(const ModelParams& params, std::uint32_t k);

/// The real j at which mu_j = 1. Throws std::domain_error for p = 1/2.
double gamma_threshold(std::uint32_t k, double lambda, double p);

double normal_cdf(double x);
/// Inverse of normal_cdf on (0,1); throws std::domain_error at the ends.
double normal_quantile(double a);

/// 1 - Phi((gamma - k/2) / sqrt(k/4)), the normal approximation of
/// P(Bin(k, 1/2) >= gamma).
double binomial_tail_normal_approx(std::uint32_t k, double gamma);

DerivedConstants derived_constants(double p);

/// log_{1/sqrt(pq)} size - |ln(p/q)| / (2 ln^{3/2}(1/sqrt(pq))) * Phi^{-1}(alpha) * sqrt(ln size).
double predict_level_closed_form(double size, double alpha, double p);

/// max{k : expected_fill_fraction(params, k) >= alpha}.
std::uint32_t predict_level_calibrated(const ModelParams& params);

enum class LcVariant { alpha_lc, full_lc };

/// Constant c in D_n ~ c log log n.
double depth_constant(double p, LcVariant variant);

/// (log n - log log log n) / log(1/p_min): the full (alpha = 1) fillup level.
double predict_full_fillup(double n, double p);

}  // namespace alctrie
