#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "polyamix/distributions.hpp"
#include "polyamix/random.hpp"

namespace polyamix {

// Hyperpriors and chain controls for the normal mixture of Dirichlet
// processes model
//
//   y_i | theta_i ~ N(mean_i, var_i)
//   theta_{1:n}   ~ Polya urn with concentration alpha and base NIG(mu, tau, s, S)
//   mu ~ N(a, A),  tau ~ Inv-Ga(w, W),  alpha ~ Ga(c, C)
//
// Defaults reproduce the galaxies setup: {c, C, a, A, w, W, s, S} =
// {1, 2, 20.8, 20.8, 0.5, 50, 2, 1}, 2000 burn-in sweeps, thinning 150.
struct ModelConfig {
  double mu_mean = 20.8;     // a
  double mu_var = 20.8;      // A
  double tau_shape = 0.5;    // w
  double tau_scale = 50.0;   // W
  double alpha_shape = 1.0;  // c
  double alpha_rate = 2.0;   // C
  double var_shape = 2.0;    // s
  double var_scale = 1.0;    // S

  std::optional<double> fix_alpha;
  std::optional<double> fix_mu;
  std::optional<double> fix_tau;

  // Redraw every distinct component from its cluster posterior once per sweep.
  bool remix = true;

  std::size_t iterations = 100;
  std::size_t burnin = 2000;
  std::size_t thin = 150;
  std::uint64_t seed = 1;

  NigParams base_measure(double mu, double tau) const {
    return {mu, tau, var_shape, var_scale};
  }
};

// Throws ValidationError when a hyperparameter or control is out of range.
void validate(const ModelConfig& config);

struct Cluster {
  Component theta;
  std::size_t size = 0;
};

// Current state of the marginal sampler. theta_i is clusters[labels[i]].theta;
// ties between thetas arise only from sharing a cluster.
struct GibbsState {
  std::vector<double> data;
  std::vector<Cluster> clusters;
  std::vector<std::size_t> labels;
  double mu = 0.0;
  double tau = 1.0;
  double alpha = 1.0;

  std::size_t n() const { return data.size(); }
  std::size_t k() const { return clusters.size(); }
  const Component& theta(std::size_t i) const { return clusters[labels[i]].theta; }
  std::vector<Component> thetas() const;
  // Index sets of observations sharing each distinct component.
  std::vector<std::vector<std::size_t>> partition() const;
  // Throws std::logic_error if labels, sizes and clusters disagree.
  void check_invariants() const;
};

// One retained iteration of the chain.
struct PosteriorDraw {
  std::vector<Component> thetas;
  double mu = 0.0;
  double tau = 1.0;
  double alpha = 1.0;
  std::size_t k = 0;
};

GibbsState init_state(std::span<const double> data, const ModelConfig& config, Rng& rng);

// Polya-urn full conditional of theta_i given the other thetas.
void update_theta(GibbsState& state, const ModelConfig& config, std::size_t i, Rng& rng);

// Same move with the likelihood switched off, so theta_i is drawn from the
// prior urn. Exists for prior-reproduction checks.
void update_theta_prior(GibbsState& state, const ModelConfig& config, std::size_t i,
                        Rng& rng);

void remix_clusters(GibbsState& state, const ModelConfig& config, Rng& rng);
void update_mu(GibbsState& state, const ModelConfig& config, Rng& rng);
void update_tau(GibbsState& state, const ModelConfig& config, Rng& rng);
void update_alpha(GibbsState& state, const ModelConfig& config, Rng& rng);

// update_theta for i = 0..n-1, then remix (if enabled), mu, tau and alpha.
void sweep(GibbsState& state, const ModelConfig& config, Rng& rng);

PosteriorDraw snapshot(const GibbsState& state);

std::vector<PosteriorDraw> run_chain(std::span<const double> data, const ModelConfig& config);

// Number of distinct components in a draw (exact equality).
std::size_t count_components(const PosteriorDraw& draw);

// Distinct components of a draw in order of first appearance, together with
// the index of the distinct component each theta_i maps to.
struct DistinctComponents {
  std::vector<Component> components;
  std::vector<std::size_t> counts;
  std::vector<std::size_t> labels;
};
DistinctComponents distinct_components(std::span<const Component> thetas);

}  // namespace polyamix
