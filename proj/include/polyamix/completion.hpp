#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "polyamix/distributions.hpp"
#include "polyamix/gibbs.hpp"
#include "polyamix/random.hpp"

namespace polyamix {

struct CompletionConfig {
  double eps = 0.01;  // tolerated unassigned stick mass
  double ups = 0.01;  // probability of exceeding eps at the chosen truncation
  std::uint64_t seed = 1;
};

void validate(const CompletionConfig& config);

enum class Provenance { completed, prior, truncated_marginal, marginal };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

// Finite normal mixture: weights are positive and sum to one, components are
// pairwise distinct.
struct MixtureDensity {
  std::vector<double> weights;
  std::vector<Component> components;
  Provenance provenance = Provenance::completed;
  // Stick mass assigned before the remainder atom (1 when no sticks were
  // broken) and the truncation level used.
  double stick_mass = 1.0;
  std::size_t truncation = 0;

  std::size_t size() const { return weights.size(); }
  double mean() const;
  double variance() const;
  // Throws std::logic_error when the mixture invariants fail.
  void check_invariants() const;
};

// 2 + the (1 - ups) quantile of Pois((alpha + n) * (-log eps)).
std::size_t truncation_level(double alpha, std::size_t n, double eps, double ups);

// Stick-breaking weights from v_{1:M}; the last entry is the remainder
// 1 - sum of the first M-1 weights.
std::vector<double> stick_weights(std::span<const double> v);

// One draw from G_n = (alpha G0 + sum_i delta_{theta_i}) / (alpha + n).
Component draw_atom(const PosteriorDraw& draw, const NigParams& g0, Rng& rng);

// Extends one marginal posterior draw to a random mixture from the full
// posterior with unassigned stick mass below eps with probability >= 1 - ups.
MixtureDensity complete(const PosteriorDraw& draw, const NigParams& g0,
                        const CompletionConfig& config, Rng& rng);

// Completes every draw. Draw t uses substream(config.seed, t), so the result is
// identical for any number of worker threads (0 picks hardware concurrency).
std::vector<MixtureDensity> complete_all(std::span<const PosteriorDraw> draws,
                                         const ModelConfig& model,
                                         const CompletionConfig& config,
                                         unsigned threads = 1);

// Mixture implied by the draw itself: distinct components weighted by their
// multiplicity among theta_{1:n}.
MixtureDensity marginal_mixture(const PosteriorDraw& draw);

// Sum the weights of identical components and drop zero weights.
MixtureDensity merge_ties(const MixtureDensity& mix);

}  // namespace polyamix
