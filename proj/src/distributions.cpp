#include "polyamix/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace polyamix {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

void require_positive(double x, const char* what) {
  if (!positive_finite(x)) {
    throw DomainError(std::string(what) + " must be positive and finite");
  }
}

// Marsaglia & Tsang, unit rate, shape >= 1.
double gamma_unit_large(double shape, Rng& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

void validate(const NigParams& p) {
  if (!std::isfinite(p.mu)) throw DomainError("NIG location must be finite");
  require_positive(p.tau, "NIG tau");
  require_positive(p.shape, "NIG shape");
  require_positive(p.scale, "NIG scale");
}

double sample_gamma(double shape, double rate, Rng& rng) {
  require_positive(shape, "gamma shape");
  require_positive(rate, "gamma rate");
  if (shape >= 1.0) return gamma_unit_large(shape, rng) / rate;
  // Boost a shape < 1 draw: G(a) = G(a + 1) * U^(1/a), done in log space.
  const double g = gamma_unit_large(shape + 1.0, rng);
  const double log_u = std::log(rng.uniform());
  const double x = std::exp(std::log(g) + log_u / shape) / rate;
  return std::max(x, std::numeric_limits<double>::min());
}

double sample_inverse_gamma(double shape, double scale, Rng& rng) {
  require_positive(shape, "inverse-gamma shape");
  require_positive(scale, "inverse-gamma scale");
  return 1.0 / sample_gamma(shape, scale, rng);
}

double sample_beta(double a, double b, Rng& rng) {
  require_positive(a, "beta a");
  require_positive(b, "beta b");
  double v;
  if (a == 1.0) {
    // Inversion: 1 - U^(1/b).
    v = -std::expm1(std::log(rng.uniform()) / b);
  } else {
    const double x = sample_gamma(a, 1.0, rng);
    const double y = sample_gamma(b, 1.0, rng);
    v = x / (x + y);
  }
  // keep strictly inside (0,1)
  return std::clamp(v, std::numeric_limits<double>::min(),
                    1.0 - std::numeric_limits<double>::epsilon() / 2);
}

double sample_normal(double mean, double variance, Rng& rng) {
  return mean + std::sqrt(variance) * rng.normal();
}

Component sample_nig(const NigParams& params, Rng& rng) {
  validate(params);
  const double v = sample_inverse_gamma(params.shape, params.scale, rng);
  const double m = sample_normal(params.mu, params.tau * v, rng);
  return {m, v};
}

double normal_log_density(double y, const Component& c) {
  const double z = y - c.mean;
  return -kLogSqrt2Pi - 0.5 * std::log(c.variance) - 0.5 * z * z / c.variance;
}

double normal_density(double y, const Component& c) {
  return std::exp(normal_log_density(y, c));
}

double normal_cdf(double y, const Component& c) {
  return 0.5 * std::erfc(-(y - c.mean) / std::sqrt(2.0 * c.variance));
}

double marginal_t_log_density(double y, const NigParams& p) {
  validate(p);
  const double df = 2.0 * p.shape;
  const double scale2 = p.scale * (1.0 + p.tau) / p.shape;
  const double z2 = (y - p.mu) * (y - p.mu) / scale2;
  return std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
         0.5 * std::log(df * std::numbers::pi * scale2) -
         0.5 * (df + 1.0) * std::log1p(z2 / df);
}

double marginal_t_density(double y, const NigParams& p) {
  return std::exp(marginal_t_log_density(y, p));
}

NigParams nig_posterior_single(double y, const NigParams& p) {
  validate(p);
  const double r = y - p.mu;
  return {(p.mu + p.tau * y) / (1.0 + p.tau), p.tau / (1.0 + p.tau),
          p.shape + 0.5, p.scale + r * r / (2.0 * (1.0 + p.tau))};
}

std::uint64_t poisson_quantile(double p, double rate) {
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("poisson quantile needs p in [0,1)");
  if (!(std::isfinite(rate) && rate >= 0.0)) {
    throw DomainError("poisson rate must be finite and nonnegative");
  }
  if (rate == 0.0 || p == 0.0) return 0;

  // log pmf(m) via lgamma; CDF accumulated from a starting point well below
  // the quantile. Terms below the start are summed downward separately.
  auto log_pmf = [rate](double m) {
    return m * std::log(rate) - rate - std::lgamma(m + 1.0);
  };

  std::uint64_t start = 0;
  if (rate > 1e4) {
    const double lo = rate - 12.0 * std::sqrt(rate);
    start = static_cast<std::uint64_t>(std::max(0.0, std::floor(lo)));
  }
  // Mass strictly below `start`. Only nonzero for the large-rate bracket.
  double below = 0.0;
  if (start > 0) {
    for (std::uint64_t m = start; m-- > 0;) {
      const double t = std::exp(log_pmf(static_cast<double>(m)));
      below += t;
      if (t < 1e-300 || t < below * 1e-18) break;
    }
  }
  double cdf = below;
  for (std::uint64_t m = start;; ++m) {
    cdf += std::exp(log_pmf(static_cast<double>(m)));
    if (cdf >= p) return m;
    // Once past the mode with negligible increments the CDF has converged
    // short of p only through rounding; treat that as reaching p.
    if (static_cast<double>(m) > rate + 40.0 * std::sqrt(rate) + 50.0) return m;
  }
}

std::size_t sample_categorical(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw DomainError("categorical weights must be finite and nonnegative");
    }
    total += w;
  }
  if (!(total > 0.0)) throw DomainError("categorical weights sum to zero");
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] <= 0.0) continue;
    acc += weights[j];
    last_positive = j;
    if (u < acc) return j;
  }
  return last_positive;
}

std::size_t sample_categorical_log(std::span<const double> log_weights, Rng& rng) {
  if (log_weights.empty()) throw DomainError("categorical needs at least one weight");
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  if (!std::isfinite(top)) throw DomainError("categorical log weights all -inf");
  thread_local std::vector<double> w;
  w.resize(log_weights.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = std::exp(log_weights[j] - top);
  return sample_categorical(w, rng);
}

}  // namespace polyamix
