#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "polyamix/completion.hpp"
#include "polyamix/gibbs.hpp"

namespace polyamix {

// A random mixture from the Dirichlet process prior: sticks Beta(1, alpha),
// atoms i.i.d. from g0, truncated by the same (eps, ups) rule as completion.
MixtureDensity sample_prior_mixture(double alpha, const NigParams& g0, double eps, double ups,
                                    Rng& rng);

struct PriorTruth {
  MixtureDensity mixture;
  double alpha = 1.0;
  double mu = 0.0;
  double tau = 1.0;
};

// Draws alpha, mu and tau from the model hyperpriors (unless fixed in the
// config) and then a prior mixture with base measure NIG(mu, tau, s, S).
PriorTruth sample_prior_truth(const ModelConfig& model, double eps, double ups, Rng& rng);

struct LabeledSample {
  std::vector<double> y;
  std::vector<std::size_t> labels;
};

LabeledSample generate_labeled_data(const MixtureDensity& mix, std::size_t n, Rng& rng);

// Occupied components only, weighted by how many observations each generated.
MixtureDensity truncated_marginal(const MixtureDensity& mix, std::span<const std::size_t> labels);

}  // namespace polyamix
