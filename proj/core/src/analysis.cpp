#include "alctrie/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "alctrie/error.hpp"

namespace alctrie {

namespace {

void check_p(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must lie in (0,1)");
}

void check_alpha_open(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0,1)");
}

double log2_of(double x) { return std::log2(x); }

}  // namespace

void ModelParams::validate() const {
  check_p(p);
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
  if (model == SizeModel::fixed) {
    if (!(size >= 0.0) || size != std::floor(size))
      throw std::invalid_argument("n must be a non-negative integer");
  } else if (!(size > 0.0) || !std::isfinite(size)) {
    throw std::invalid_argument("lambda must be positive");
  }
}

double prob_poisson_ge2(double mu) {
  if (!(mu >= 0.0)) throw std::invalid_argument("Poisson mean must be non-negative");
  if (mu < 0.5) {
    // sum_{m>=2} (-1)^m (m-1) mu^m / m!
    double term = mu * mu / 2.0;  // mu^m / m! at m = 2
    double sum = term;
    for (int m = 3; m < 40; ++m) {
      term *= mu / m;
      const double add = ((m & 1) ? -1.0 : 1.0) * (m - 1) * term;
      sum += add;
      if (std::fabs(add) <= 1e-18 * sum) break;
    }
    return sum;
  }
  return -std::expm1(-mu) - mu * std::exp(-mu);
}

double log_binomial(std::uint32_t k, std::uint32_t j) {
  if (j > k) throw std::invalid_argument("log_binomial needs j <= k");
  return std::lgamma(k + 1.0) - std::lgamma(j + 1.0) - std::lgamma(k - j + 1.0);
}

double prob_binomial_ge2(std::uint64_t n, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("probability must lie in [0,1]");
  if (n < 2 || q == 0.0) return 0.0;
  if (q == 1.0) return 1.0;
  const double nd = static_cast<double>(n);
  const double log_keep = std::log1p(-q);
  if (nd * q < 0.5) {
    // Direct pmf sum from j = 2; terms shrink at least geometrically here.
    const double ratio_base = q / (1.0 - q);
    double term = std::exp(std::log(nd) + std::log(nd - 1.0) - std::log(2.0) + 2.0 * std::log(q) +
                           (nd - 2.0) * log_keep);
    double sum = term;
    for (std::uint64_t j = 2; j < n; ++j) {
      term *= (nd - static_cast<double>(j)) / static_cast<double>(j + 1) * ratio_base;
      sum += term;
      if (term <= 1e-18 * sum) break;
    }
    return sum;
  }
  const double p0 = std::exp(nd * log_keep);
  const double p1 = nd * q * std::exp((nd - 1.0) * log_keep);
  return std::max(0.0, 1.0 - p0 - p1);
}

double mu_j(double lambda, std::uint32_t k, std::uint32_t j, double p) {
  check_p(p);
  if (j > k) throw std::invalid_argument("mu_j needs j <= k");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  return std::exp(std::log(lambda) + j * std::log(p) + (k - j) * std::log1p(-p));
}

double expected_fill_fraction(const ModelParams& params, std::uint32_t k) {
  params.validate();
  const double log_p = std::log(params.p);
  const double log_q = std::log1p(-params.p);
  const double log_half_k = -static_cast<double>(k) * std::numbers::ln2;
  const auto n = static_cast<std::uint64_t>(params.size);
  const double log_lambda = params.model == SizeModel::poisson ? std::log(params.size) : 0.0;

  double sum = 0.0;
  for (std::uint32_t j = 0; j <= k; ++j) {
    const double weight = std::exp(log_binomial(k, j) + log_half_k);
    const double log_prefix = j * log_p + (k - j) * log_q;
    const double filled = params.model == SizeModel::poisson
                              ? prob_poisson_ge2(std::exp(log_lambda + log_prefix))
                              : prob_binomial_ge2(n, std::exp(log_prefix));
    sum += weight * filled;
  }
  return std::min(sum, 1.0);
}

double gamma_threshold(std::uint32_t k, double lambda, double p) {
  check_p(p);
  if (p == 0.5) throw std::domain_error("gamma threshold is undefined for p = 1/2");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  return (k * -std::log1p(-p) - std::log(lambda)) / (std::log(p) - std::log1p(-p));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double a) {
  if (!(a > 0.0 && a < 1.0)) throw std::domain_error("normal quantile needs 0 < a < 1");
  // Acklam's rational approximation (relative error ~1e-9) ...
  static constexpr double c_a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double c_b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
  static constexpr double c_c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double c_d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double low = 0.02425;
  double x;
  if (a < low) {
    const double t = std::sqrt(-2.0 * std::log(a));
    x = (((((c_c[0] * t + c_c[1]) * t + c_c[2]) * t + c_c[3]) * t + c_c[4]) * t + c_c[5]) /
        ((((c_d[0] * t + c_d[1]) * t + c_d[2]) * t + c_d[3]) * t + 1.0);
  } else if (a <= 1.0 - low) {
    const double t = a - 0.5;
    const double r = t * t;
    x = (((((c_a[0] * r + c_a[1]) * r + c_a[2]) * r + c_a[3]) * r + c_a[4]) * r + c_a[5]) * t /
        (((((c_b[0] * r + c_b[1]) * r + c_b[2]) * r + c_b[3]) * r + c_b[4]) * r + 1.0);
  } else {
    const double t = std::sqrt(-2.0 * std::log1p(-a));
    x = -(((((c_c[0] * t + c_c[1]) * t + c_c[2]) * t + c_c[3]) * t + c_c[4]) * t + c_c[5]) /
        ((((c_d[0] * t + c_d[1]) * t + c_d[2]) * t + c_d[3]) * t + 1.0);
  }
  // ... refined by one Newton step against normal_cdf.
  const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  if (density > 0.0) x -= (normal_cdf(x) - a) / density;
  return x;
}

double binomial_tail_normal_approx(std::uint32_t k, double gamma) {
  if (k < 1) throw std::invalid_argument("binomial tail approximation needs k >= 1");
  return 1.0 - normal_cdf((gamma - k / 2.0) / std::sqrt(k / 4.0));
}

DerivedConstants derived_constants(double p) {
  check_p(p);
  const double q = 1.0 - p;
  DerivedConstants c;
  c.h = -(p * log2_of(p) + q * log2_of(q));
  c.h_inf = -log2_of(std::min(p, q));
  c.b = -0.5 * (log2_of(p) + log2_of(q));
  c.kappa = c.h / c.b;
  c.rho = p / q;
  return c;
}

double predict_level_closed_form(double size, double alpha, double p) {
  check_p(p);
  check_alpha_open(alpha);
  if (!(size > 1.0)) throw std::domain_error("closed-form level needs size > 1");
  const double q = 1.0 - p;
  const double ln_base = -0.5 * std::log(p * q);  // ln(1/sqrt(pq))
  const double ln_size = std::log(size);
  const double coeff = std::fabs(std::log(p) - std::log(q)) / (2.0 * std::pow(ln_base, 1.5));
  return ln_size / ln_base - coeff * normal_quantile(alpha) * std::sqrt(ln_size);
}

std::uint32_t predict_level_calibrated(const ModelParams& params) {
  params.validate();
  check_alpha_open(params.alpha);
  if (!(params.size >= 2.0)) throw std::domain_error("calibrated level needs size >= 2");
  const auto cap = static_cast<std::uint32_t>(std::ceil(8.0 * std::log2(params.size)));
  for (std::uint32_t k = 0; k <= cap; ++k) {
    if (expected_fill_fraction(params, k) < params.alpha) {
      if (k == 0) throw std::domain_error("expected root fill is already below alpha");
      return k - 1;
    }
  }
  throw Error("calibrated level search exceeded " + std::to_string(cap) + " levels");
}

double depth_constant(double p, LcVariant variant) {
  check_p(p);
  if (p == 0.5) throw std::domain_error("depth constant needs p != 1/2");
  const DerivedConstants c = derived_constants(p);
  const double denom = variant == LcVariant::alpha_lc ? c.b : c.h_inf;
  return 1.0 / -log2_of(1.0 - c.h / denom);
}

double predict_full_fillup(double n, double p) {
  check_p(p);
  if (p == 0.5) throw std::domain_error("full fillup predictor needs p != 1/2");
  if (!(n >= 16.0)) throw std::domain_error("full fillup predictor needs n >= 16");
  return (log2_of(n) - log2_of(log2_of(log2_of(n)))) / derived_constants(p).h_inf;
}

}  // namespace alctrie
