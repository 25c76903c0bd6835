#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "polyamix/random.hpp"

namespace polyamix {

// Raised when a parameter lies outside the domain of the operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised when user-supplied data (observations, files, flags) is unusable.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Kernel parameter of a single normal component.
struct Component {
  double mean = 0.0;
  double variance = 1.0;

  friend bool operator==(const Component&, const Component&) = default;
  friend auto operator<=>(const Component&, const Component&) = default;
};

// Normal-inverse-gamma base measure:
//   V ~ Inv-Ga(shape, scale),   mean | V ~ N(mu, tau * V).
struct NigParams {
  double mu = 0.0;
  double tau = 1.0;
  double shape = 2.0;
  double scale = 1.0;

  friend bool operator==(const NigParams&, const NigParams&) = default;
};

void validate(const NigParams& params);

double sample_beta(double a, double b, Rng& rng);
double sample_gamma(double shape, double rate, Rng& rng);
double sample_inverse_gamma(double shape, double scale, Rng& rng);
double sample_normal(double mean, double variance, Rng& rng);
Component sample_nig(const NigParams& params, Rng& rng);

double normal_log_density(double y, const Component& c);
double normal_density(double y, const Component& c);
double normal_cdf(double y, const Component& c);

// Prior predictive of one observation: Student-t with 2*shape degrees of
// freedom, location mu and squared scale scale*(1+tau)/shape.
double marginal_t_log_density(double y, const NigParams& params);
double marginal_t_density(double y, const NigParams& params);

// Conjugate update of the base measure after observing y ~ N(mean, V).
NigParams nig_posterior_single(double y, const NigParams& params);

// Smallest m with P(Pois(rate) <= m) >= p.
std::uint64_t poisson_quantile(double p, double rate);

// Index j with probability weights[j] / sum(weights).
std::size_t sample_categorical(std::span<const double> weights, Rng& rng);

// Same, for weights given on the log scale (any common offset).
std::size_t sample_categorical_log(std::span<const double> log_weights, Rng& rng);

}  // namespace polyamix
