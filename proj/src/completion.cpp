#include "polyamix/completion.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>

namespace polyamix {

namespace {

constexpr std::size_t kFresh = static_cast<std::size_t>(-1);

// Index into theta_{1:n} of a copied atom, or kFresh for a base-measure draw.
std::size_t atom_source(double alpha, std::size_t n, Rng& rng) {
  const double total = alpha + static_cast<double>(n);
  const double u = rng.uniform() * total;
  if (n == 0 || u <= alpha) return kFresh;
  const auto idx = static_cast<std::size_t>(u - alpha);
  return std::min(idx, n - 1);
}

}  // namespace

void validate(const CompletionConfig& c) {
  if (!(c.eps > 0.0 && c.eps < 1.0)) throw DomainError("eps must lie in (0,1)");
  if (!(c.ups > 0.0 && c.ups < 1.0)) throw DomainError("ups must lie in (0,1)");
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::completed: return "completed";
    case Provenance::prior: return "prior";
    case Provenance::truncated_marginal: return "truncated-marginal";
    case Provenance::marginal: return "marginal";
  }
  return "unknown";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "completed") return Provenance::completed;
  if (s == "prior") return Provenance::prior;
  if (s == "truncated-marginal") return Provenance::truncated_marginal;
  if (s == "marginal") return Provenance::marginal;
  throw ValidationError("unknown mixture provenance '" + std::string(s) + "'");
}

double MixtureDensity::mean() const {
  double m = 0.0;
  for (std::size_t j = 0; j < size(); ++j) m += weights[j] * components[j].mean;
  return m;
}

double MixtureDensity::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t j = 0; j < size(); ++j) {
    const double d = components[j].mean - m;
    v += weights[j] * (components[j].variance + d * d);
  }
  return v;
}

void MixtureDensity::check_invariants() const {
  if (weights.size() != components.size()) throw std::logic_error("weights/components size");
  if (weights.empty()) throw std::logic_error("empty mixture");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::logic_error("non-positive mixture weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::logic_error("mixture weights do not sum to 1");
  for (const auto& c : components) {
    if (!(c.variance > 0.0) || !std::isfinite(c.variance) || !std::isfinite(c.mean)) {
      throw std::logic_error("invalid mixture component");
    }
  }
  auto sorted = components;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::logic_error("duplicate mixture component");
  }
}

std::size_t truncation_level(double alpha, std::size_t n, double eps, double ups) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be >= 0");
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("eps must lie in (0,1]");
  if (!(ups > 0.0 && ups <= 1.0)) throw DomainError("ups must lie in (0,1]");
  const double rate = (alpha + static_cast<double>(n)) * -std::log(eps);
  return 2 + static_cast<std::size_t>(poisson_quantile(1.0 - ups, rate));
}

std::vector<double> stick_weights(std::span<const double> v) {
  if (v.empty()) throw DomainError("stick breaking needs at least one stick");
  for (double x : v) {
    if (!(x > 0.0 && x < 1.0)) throw DomainError("stick fractions must lie in (0,1)");
  }
  std::vector<double> w(v.size());
  double left = 1.0;
  double assigned = 0.0;
  for (std::size_t j = 0; j + 1 < v.size(); ++j) {
    w[j] = v[j] * left;
    left *= 1.0 - v[j];
    assigned += w[j];
  }
  w.back() = std::max(0.0, 1.0 - assigned);
  return w;
}

Component draw_atom(const PosteriorDraw& draw, const NigParams& g0, Rng& rng) {
  const std::size_t src = atom_source(draw.alpha, draw.thetas.size(), rng);
  if (src == kFresh) return sample_nig(g0, rng);
  return draw.thetas[src];
}

MixtureDensity complete(const PosteriorDraw& draw, const NigParams& g0,
                        const CompletionConfig& config, Rng& rng) {
  validate(config);
  validate(g0);
  const std::size_t n = draw.thetas.size();
  const double alpha = draw.alpha;
  const std::size_t M = truncation_level(alpha, n, config.eps, config.ups);

  const double concentration = alpha + static_cast<double>(n);
  std::vector<double> v(M);
  for (auto& x : v) x = sample_beta(1.0, concentration, rng);
  const std::vector<double> w = stick_weights(v);

  // Ties among copied atoms are merged by mapping each theta_i to its
  // distinct component; fresh base-measure atoms are always new.
  const DistinctComponents distinct = distinct_components(draw.thetas);
  std::vector<std::size_t> slot_of(distinct.components.size(), kFresh);

  MixtureDensity out;
  out.provenance = n == 0 ? Provenance::prior : Provenance::completed;
  out.truncation = M;
  out.stick_mass = 1.0 - w.back();
  out.weights.reserve(M);
  out.components.reserve(M);
  for (std::size_t m = 0; m < M; ++m) {
    const std::size_t src = atom_source(alpha, n, rng);
    if (src == kFresh) {
      out.components.push_back(sample_nig(g0, rng));
      out.weights.push_back(w[m]);
      continue;
    }
    std::size_t& slot = slot_of[distinct.labels[src]];
    if (slot == kFresh) {
      slot = out.components.size();
      out.components.push_back(distinct.components[distinct.labels[src]]);
      out.weights.push_back(w[m]);
    } else {
      out.weights[slot] += w[m];
    }
  }

  std::size_t keep = 0;
  for (std::size_t j = 0; j < out.weights.size(); ++j) {
    if (out.weights[j] > 0.0) {
      out.weights[keep] = out.weights[j];
      out.components[keep] = out.components[j];
      ++keep;
    }
  }
  out.weights.resize(keep);
  out.components.resize(keep);
  return out;
}

std::vector<MixtureDensity> complete_all(std::span<const PosteriorDraw> draws,
                                         const ModelConfig& model,
                                         const CompletionConfig& config,
                                         unsigned threads) {
  if (draws.empty()) throw DomainError("no posterior draws to complete");
  validate(config);
  std::vector<MixtureDensity> out(draws.size());
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t t = begin; t < draws.size(); t += step) {
      Rng rng = substream(config.seed, t);
      out[t] = complete(draws[t], model.base_measure(draws[t].mu, draws[t].tau), config, rng);
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, draws.size()));
  if (threads <= 1) {
    work(0, 1);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(w, threads);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

MixtureDensity marginal_mixture(const PosteriorDraw& draw) {
  if (draw.thetas.empty()) throw DomainError("draw has no thetas");
  const DistinctComponents d = distinct_components(draw.thetas);
  MixtureDensity out;
  out.provenance = Provenance::marginal;
  out.components = d.components;
  const double n = static_cast<double>(draw.thetas.size());
  for (auto c : d.counts) out.weights.push_back(static_cast<double>(c) / n);
  return out;
}

MixtureDensity merge_ties(const MixtureDensity& mix) {
  MixtureDensity out = mix;
  out.weights.clear();
  out.components.clear();
  std::map<Component, std::size_t> slot;
  for (std::size_t j = 0; j < mix.size(); ++j) {
    if (!(mix.weights[j] > 0.0)) continue;
    auto [it, inserted] = slot.try_emplace(mix.components[j], out.components.size());
    if (inserted) {
      out.components.push_back(mix.components[j]);
      out.weights.push_back(mix.weights[j]);
    } else {
      out.weights[it->second] += mix.weights[j];
    }
  }
  return out;
}

}  // namespace polyamix
