#include "polyamix/simulation.hpp"

namespace polyamix {

MixtureDensity sample_prior_mixture(double alpha, const NigParams& g0, double eps, double ups,
                                    Rng& rng) {
  if (!(alpha > 0.0)) throw DomainError("prior mixture needs alpha > 0");
  PosteriorDraw empty;
  empty.alpha = alpha;
  empty.mu = g0.mu;
  empty.tau = g0.tau;
  return complete(empty, g0, CompletionConfig{eps, ups, 0}, rng);
}

PriorTruth sample_prior_truth(const ModelConfig& model, double eps, double ups, Rng& rng) {
  validate(model);
  PriorTruth truth;
  truth.alpha = model.fix_alpha ? *model.fix_alpha
                                : sample_gamma(model.alpha_shape, model.alpha_rate, rng);
  truth.mu = model.fix_mu ? *model.fix_mu : sample_normal(model.mu_mean, model.mu_var, rng);
  truth.tau = model.fix_tau ? *model.fix_tau
                            : sample_inverse_gamma(model.tau_shape, model.tau_scale, rng);
  truth.mixture = sample_prior_mixture(truth.alpha, model.base_measure(truth.mu, truth.tau),
                                       eps, ups, rng);
  return truth;
}

LabeledSample generate_labeled_data(const MixtureDensity& mix, std::size_t n, Rng& rng) {
  LabeledSample out;
  out.y.reserve(n);
  out.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = sample_categorical(mix.weights, rng);
    out.labels.push_back(k);
    const auto& c = mix.components[k];
    out.y.push_back(sample_normal(c.mean, c.variance, rng));
  }
  return out;
}

MixtureDensity truncated_marginal(const MixtureDensity& mix, std::span<const std::size_t> labels) {
  if (labels.empty()) throw DomainError("truncated marginal needs at least one label");
  std::vector<std::size_t> counts(mix.size(), 0);
  for (auto k : labels) {
    if (k >= mix.size()) throw DomainError("label does not reference a component");
    ++counts[k];
  }
  MixtureDensity out;
  out.provenance = Provenance::truncated_marginal;
  const double n = static_cast<double>(labels.size());
  for (std::size_t j = 0; j < mix.size(); ++j) {
    if (counts[j] == 0) continue;
    out.components.push_back(mix.components[j]);
    out.weights.push_back(static_cast<double>(counts[j]) / n);
  }
  return out;
}

}  // namespace polyamix
