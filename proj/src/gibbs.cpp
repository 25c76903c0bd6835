#include "polyamix/gibbs.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace polyamix {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

// Removes observation i from its cluster, dropping the cluster if it empties.
void detach(GibbsState& s, std::size_t i) {
  const std::size_t c = s.labels[i];
  if (--s.clusters[c].size > 0) return;
  const std::size_t last = s.clusters.size() - 1;
  if (c != last) {
    s.clusters[c] = s.clusters[last];
    for (auto& label : s.labels) {
      if (label == last) label = c;
    }
  }
  s.clusters.pop_back();
}

void attach_new(GibbsState& s, std::size_t i, const Component& theta) {
  s.clusters.push_back({theta, 1});
  s.labels[i] = s.clusters.size() - 1;
}

void debug_check([[maybe_unused]] const GibbsState& s) {
#ifndef NDEBUG
  s.check_invariants();
#endif
}

}  // namespace

void validate(const ModelConfig& c) {
  require(std::isfinite(c.mu_mean), "mu prior mean must be finite");
  require(positive_finite(c.mu_var), "mu prior variance must be positive");
  require(positive_finite(c.tau_shape), "tau prior shape must be positive");
  require(positive_finite(c.tau_scale), "tau prior scale must be positive");
  require(positive_finite(c.alpha_shape), "alpha prior shape must be positive");
  require(positive_finite(c.alpha_rate), "alpha prior rate must be positive");
  require(positive_finite(c.var_shape), "variance prior shape must be positive");
  require(positive_finite(c.var_scale), "variance prior scale must be positive");
  if (c.fix_alpha) require(positive_finite(*c.fix_alpha), "fixed alpha must be positive");
  if (c.fix_mu) require(std::isfinite(*c.fix_mu), "fixed mu must be finite");
  if (c.fix_tau) require(positive_finite(*c.fix_tau), "fixed tau must be positive");
  require(c.thin >= 1, "thinning must be at least 1");
}

std::vector<Component> GibbsState::thetas() const {
  std::vector<Component> out;
  out.reserve(labels.size());
  for (auto label : labels) out.push_back(clusters[label].theta);
  return out;
}

std::vector<std::vector<std::size_t>> GibbsState::partition() const {
  std::vector<std::vector<std::size_t>> sets(clusters.size());
  for (std::size_t i = 0; i < labels.size(); ++i) sets[labels[i]].push_back(i);
  return sets;
}

void GibbsState::check_invariants() const {
  if (labels.size() != data.size()) throw std::logic_error("labels/data size mismatch");
  if (data.empty()) return;
  if (clusters.empty() || clusters.size() > data.size()) {
    throw std::logic_error("cluster count outside [1, n]");
  }
  std::vector<std::size_t> counts(clusters.size(), 0);
  for (auto label : labels) {
    if (label >= clusters.size()) throw std::logic_error("label out of range");
    ++counts[label];
  }
  for (std::size_t j = 0; j < clusters.size(); ++j) {
    if (counts[j] != clusters[j].size || counts[j] == 0) {
      throw std::logic_error("cluster size bookkeeping is inconsistent");
    }
    for (std::size_t l = j + 1; l < clusters.size(); ++l) {
      if (clusters[j].theta == clusters[l].theta) {
        throw std::logic_error("two clusters share a component");
      }
    }
  }
}

GibbsState init_state(std::span<const double> data, const ModelConfig& config, Rng& rng) {
  validate(config);
  if (data.empty()) throw DomainError("at least one observation is required");
  for (double y : data) {
    if (!std::isfinite(y)) throw ValidationError("observations must be finite");
  }

  GibbsState s;
  s.data.assign(data.begin(), data.end());
  s.mu = config.fix_mu ? *config.fix_mu : sample_normal(config.mu_mean, config.mu_var, rng);
  s.tau = config.fix_tau ? *config.fix_tau
                         : sample_inverse_gamma(config.tau_shape, config.tau_scale, rng);
  s.alpha = config.fix_alpha ? *config.fix_alpha
                             : sample_gamma(config.alpha_shape, config.alpha_rate, rng);

  const NigParams g0 = config.base_measure(s.mu, s.tau);
  s.labels.resize(s.n());
  s.clusters.reserve(s.n());
  for (std::size_t i = 0; i < s.n(); ++i) {
    attach_new(s, i, sample_nig(nig_posterior_single(s.data[i], g0), rng));
  }
  debug_check(s);
  return s;
}

void update_theta(GibbsState& s, const ModelConfig& config, std::size_t i, Rng& rng) {
  const double y = s.data[i];
  detach(s, i);

  const NigParams g0 = config.base_measure(s.mu, s.tau);
  thread_local std::vector<double> logw;
  logw.resize(s.clusters.size() + 1);
  for (std::size_t j = 0; j < s.clusters.size(); ++j) {
    const auto& c = s.clusters[j];
    logw[j] = std::log(static_cast<double>(c.size)) + normal_log_density(y, c.theta);
  }
  logw.back() = std::log(s.alpha) + marginal_t_log_density(y, g0);

  const std::size_t pick = sample_categorical_log(logw, rng);
  if (pick == s.clusters.size()) {
    attach_new(s, i, sample_nig(nig_posterior_single(y, g0), rng));
  } else {
    s.labels[i] = pick;
    ++s.clusters[pick].size;
  }
}

void update_theta_prior(GibbsState& s, const ModelConfig& config, std::size_t i,
                        Rng& rng) {
  detach(s, i);
  thread_local std::vector<double> w;
  w.resize(s.clusters.size() + 1);
  for (std::size_t j = 0; j < s.clusters.size(); ++j) {
    w[j] = static_cast<double>(s.clusters[j].size);
  }
  w.back() = s.alpha;
  const std::size_t pick = sample_categorical(w, rng);
  if (pick == s.clusters.size()) {
    attach_new(s, i, sample_nig(config.base_measure(s.mu, s.tau), rng));
  } else {
    s.labels[i] = pick;
    ++s.clusters[pick].size;
  }
}

void remix_clusters(GibbsState& s, const ModelConfig& config, Rng& rng) {
  const NigParams g0 = config.base_measure(s.mu, s.tau);
  std::vector<NigParams> post(s.clusters.size(), g0);
  for (std::size_t i = 0; i < s.n(); ++i) {
    auto& p = post[s.labels[i]];
    p = nig_posterior_single(s.data[i], p);
  }
  for (std::size_t j = 0; j < s.clusters.size(); ++j) {
    s.clusters[j].theta = sample_nig(post[j], rng);
  }
}

void update_mu(GibbsState& s, const ModelConfig& config, Rng& rng) {
  if (config.fix_mu) return;
  double precision = 1.0 / config.mu_var;
  double weighted = config.mu_mean / config.mu_var;
  for (const auto& c : s.clusters) {
    const double p = 1.0 / (s.tau * c.theta.variance);
    precision += p;
    weighted += p * c.theta.mean;
  }
  s.mu = sample_normal(weighted / precision, 1.0 / precision, rng);
}

void update_tau(GibbsState& s, const ModelConfig& config, Rng& rng) {
  if (config.fix_tau) return;
  double ss = 0.0;
  for (const auto& c : s.clusters) {
    const double r = c.theta.mean - s.mu;
    ss += r * r / c.theta.variance;
  }
  const double k = static_cast<double>(s.k());
  s.tau = sample_inverse_gamma(config.tau_shape + 0.5 * k, config.tau_scale + 0.5 * ss, rng);
}

void update_alpha(GibbsState& s, const ModelConfig& config, Rng& rng) {
  if (config.fix_alpha) return;
  const double n = static_cast<double>(s.n());
  const double k = static_cast<double>(s.k());
  const double x = sample_beta(s.alpha + 1.0, n, rng);
  const double rate = config.alpha_rate - std::log(x);
  const double odds = (config.alpha_shape + k - 1.0) / (n * rate);
  const double pi = odds / (1.0 + odds);
  const double shape = rng.uniform() < pi ? config.alpha_shape + k
                                          : config.alpha_shape + k - 1.0;
  s.alpha = sample_gamma(shape, rate, rng);
}

void sweep(GibbsState& s, const ModelConfig& config, Rng& rng) {
  for (std::size_t i = 0; i < s.n(); ++i) update_theta(s, config, i, rng);
  if (config.remix) remix_clusters(s, config, rng);
  update_mu(s, config, rng);
  update_tau(s, config, rng);
  update_alpha(s, config, rng);
  debug_check(s);
}

PosteriorDraw snapshot(const GibbsState& s) {
  return {s.thetas(), s.mu, s.tau, s.alpha, s.k()};
}

std::vector<PosteriorDraw> run_chain(std::span<const double> data, const ModelConfig& config) {
  Rng rng(config.seed);
  GibbsState state = init_state(data, config, rng);
  std::vector<PosteriorDraw> draws;
  draws.reserve(config.iterations);
  for (std::size_t b = 0; b < config.burnin; ++b) sweep(state, config, rng);
  for (std::size_t t = 0; t < config.iterations; ++t) {
    for (std::size_t r = 0; r < config.thin; ++r) sweep(state, config, rng);
    draws.push_back(snapshot(state));
  }
  return draws;
}

DistinctComponents distinct_components(std::span<const Component> thetas) {
  DistinctComponents out;
  std::map<Component, std::size_t> index;
  out.labels.reserve(thetas.size());
  for (const auto& theta : thetas) {
    auto [it, inserted] = index.try_emplace(theta, out.components.size());
    if (inserted) {
      out.components.push_back(theta);
      out.counts.push_back(0);
    }
    ++out.counts[it->second];
    out.labels.push_back(it->second);
  }
  return out;
}

std::size_t count_components(const PosteriorDraw& draw) {
  return distinct_components(draw.thetas).components.size();
}

}  // namespace polyamix
