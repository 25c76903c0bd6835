#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "polyamix/datasets.hpp"
#include "polyamix/gibbs.hpp"

using namespace polyamix;

namespace {

// State with the given clusters; cluster j owns sizes[j] observations, all
// with value y.
GibbsState fixed_state(const std::vector<Component>& comps,
                       const std::vector<std::size_t>& sizes, double mu, double tau,
                       double alpha, double y = 0.0) {
  GibbsState s;
  s.mu = mu;
  s.tau = tau;
  s.alpha = alpha;
  for (std::size_t j = 0; j < comps.size(); ++j) {
    s.clusters.push_back({comps[j], sizes[j]});
    for (std::size_t r = 0; r < sizes[j]; ++r) {
      s.data.push_back(y);
      s.labels.push_back(j);
    }
  }
  s.check_invariants();
  return s;
}

std::vector<double> k_histogram(const std::vector<PosteriorDraw>& draws, std::size_t n) {
  std::vector<double> h(n + 1, 0.0);
  for (const auto& d : draws) h[d.k] += 1.0;
  return h;
}

std::vector<double> small_dataset() {
  return {-2.1, -1.8, -2.4, -1.9, 0.2, 0.1, -0.3, 0.4, 3.9, 4.2,
          4.1,  3.7,  4.4,  -2.0, 0.0, 4.0, 3.8, -2.2, 0.3, 4.3};
}

}  // namespace

TEST_CASE("model config defaults and validation") {
  ModelConfig c;
  CHECK(c.alpha_shape == 1.0);
  CHECK(c.alpha_rate == 2.0);
  CHECK(c.mu_mean == 20.8);
  CHECK(c.mu_var == 20.8);
  CHECK(c.tau_shape == 0.5);
  CHECK(c.tau_scale == 50.0);
  CHECK(c.var_shape == 2.0);
  CHECK(c.var_scale == 1.0);
  CHECK(c.burnin == 2000);
  CHECK(c.thin == 150);
  CHECK_NOTHROW(validate(c));

  auto bad = c;
  bad.mu_var = 0.0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = c;
  bad.var_scale = -1.0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = c;
  bad.fix_alpha = 0.0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = c;
  bad.thin = 0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("init_state") {
  ModelConfig c;
  Rng rng(3);

  SUBCASE("single observation") {
    const std::vector<double> y{1.5};
    auto s = init_state(y, c, rng);
    CHECK(s.k() == 1);
  }
  SUBCASE("fixed hyperparameters are carried") {
    c.fix_alpha = 1.0;
    c.fix_mu = 0.0;
    c.fix_tau = 1.0;
    const std::vector<double> y{1.0, 2.0};
    auto s = init_state(y, c, rng);
    CHECK(s.alpha == 1.0);
    CHECK(s.mu == 0.0);
    CHECK(s.tau == 1.0);
  }
  SUBCASE("galaxies start from singletons") {
    const auto y = *builtin_dataset("galaxies");
    auto s = init_state(y, c, rng);
    CHECK(s.n() == 82);
    CHECK(s.k() == 82);
    for (const auto& t : s.thetas()) {
      CHECK(std::isfinite(t.mean));
      CHECK(std::isfinite(t.variance));
      CHECK(t.variance > 0.0);
    }
    CHECK_NOTHROW(s.check_invariants());
  }
  SUBCASE("errors") {
    const std::vector<double> empty;
    CHECK_THROWS_AS(init_state(empty, c, rng), DomainError);
    const std::vector<double> nan{1.0, std::nan("")};
    CHECK_THROWS_AS(init_state(nan, c, rng), ValidationError);
    const std::vector<double> inf{INFINITY};
    CHECK_THROWS_AS(init_state(inf, c, rng), ValidationError);
  }
}

TEST_CASE("update_theta") {
  SUBCASE("n=1 redraws from the single-observation posterior") {
    ModelConfig c;
    c.fix_alpha = 1.0;
    c.fix_mu = 0.0;
    c.fix_tau = 1.0;
    const std::vector<double> y{2.0};
    Rng rng(5);
    auto s = init_state(y, c, rng);
    const NigParams post = nig_posterior_single(2.0, c.base_measure(0.0, 1.0));
    std::vector<double> means, vars;
    Component prev = s.theta(0);
    std::size_t changed = 0;
    for (int r = 0; r < 100000; ++r) {
      update_theta(s, c, 0, rng);
      CHECK(s.k() == 1);
      if (!(s.theta(0) == prev)) ++changed;
      prev = s.theta(0);
      means.push_back(s.theta(0).mean);
      vars.push_back(s.theta(0).variance);
    }
    CHECK(changed == 100000);
    // E[V] = S'/(s'-1), E[m] = mu'.
    auto sm = oracle::summarize(means);
    auto sv = oracle::summarize(vars);
    CHECK(std::abs(sm.mean - post.mu) < 4 * sm.se);
    CHECK(std::abs(sv.mean - post.scale / (post.shape - 1.0)) < 4 * sv.se);
  }

  SUBCASE("tiny alpha with tied data joins the other observation") {
    ModelConfig c;
    c.fix_alpha = 1e-8;
    c.fix_mu = 0.0;
    c.fix_tau = 1.0;
    const std::vector<double> y{0.5, 0.5};
    Rng rng(6);
    auto s = init_state(y, c, rng);
    int tied = 0;
    for (int r = 0; r < 2000; ++r) {
      update_theta(s, c, r % 2, rng);
      if (s.theta(0) == s.theta(1)) ++tied;
    }
    CHECK(tied >= 1999);
  }

  SUBCASE("two-point data favours separate clusters") {
    ModelConfig c;
    c.burnin = 200;
    c.thin = 1;
    c.iterations = 20000;
    c.seed = 17;
    const std::vector<double> y{-10.0, 10.0};
    const auto draws = run_chain(y, c);
    double k2 = 0.0;
    for (const auto& d : draws) k2 += d.k == 2 ? 1.0 : 0.0;
    const double p2 = k2 / static_cast<double>(draws.size());
    CHECK(p2 > 0.5);
    const auto exact = oracle::two_point_partition_posterior(
        -10.0, 10.0, c.mu_mean, c.mu_var, c.tau_shape, c.tau_scale, c.alpha_shape,
        c.alpha_rate, c.var_shape, c.var_scale);
    CHECK(exact.p_separate > exact.p_shared);
    CHECK(std::abs(p2 - exact.p_separate) < 0.03);
  }
}

TEST_CASE("two-point partition posterior with overlapping observations") {
  ModelConfig c;
  c.burnin = 500;
  c.thin = 1;
  c.iterations = 60000;
  c.seed = 18;
  const std::vector<double> y{19.0, 22.0};
  const auto draws = run_chain(y, c);
  std::vector<double> k2;
  for (const auto& d : draws) k2.push_back(d.k == 2 ? 1.0 : 0.0);
  const double p2 = oracle::summarize(k2).mean;
  const auto exact = oracle::two_point_partition_posterior(
      19.0, 22.0, c.mu_mean, c.mu_var, c.tau_shape, c.tau_scale, c.alpha_shape, c.alpha_rate,
      c.var_shape, c.var_scale);
  CHECK(exact.p_separate > 0.1);
  CHECK(exact.p_separate < 0.9);
  CHECK(std::abs(p2 - exact.p_separate) < 4 * oracle::batch_means_se(k2));
}

TEST_CASE("remix_clusters") {
  ModelConfig c;
  c.fix_mu = 0.0;
  c.fix_tau = 1.0;

  SUBCASE("singletons redraw independently from their own posteriors") {
    const std::vector<double> y{-3.0, 5.0};
    Rng rng(9);
    auto s = init_state(y, c, rng);
    REQUIRE(s.k() == 2);
    std::vector<double> m0, m1;
    for (int r = 0; r < 50000; ++r) {
      remix_clusters(s, c, rng);
      CHECK(s.k() == 2);
      m0.push_back(s.clusters[s.labels[0]].theta.mean);
      m1.push_back(s.clusters[s.labels[1]].theta.mean);
    }
    const NigParams g0 = c.base_measure(0.0, 1.0);
    auto a = oracle::summarize(m0);
    auto b = oracle::summarize(m1);
    CHECK(std::abs(a.mean - nig_posterior_single(-3.0, g0).mu) < 4 * a.se);
    CHECK(std::abs(b.mean - nig_posterior_single(5.0, g0).mu) < 4 * b.se);
  }

  SUBCASE("partition is preserved") {
    Rng rng(10);
    const auto y = small_dataset();
    auto s = init_state(y, c, rng);
    for (int r = 0; r < 20; ++r) sweep(s, c, rng);
    const auto before = s.partition();
    for (int r = 0; r < 50; ++r) remix_clusters(s, c, rng);
    CHECK(s.partition() == before);
    CHECK_NOTHROW(s.check_invariants());
  }

  SUBCASE("data at mu keeps the location at mu") {
    auto s = fixed_state({{7.0, 1.0}}, {5}, 0.0, 1.0, 1.0, 0.0);
    Rng rng(11);
    std::vector<double> means;
    for (int r = 0; r < 40000; ++r) {
      remix_clusters(s, c, rng);
      means.push_back(s.clusters[0].theta.mean);
    }
    auto sm = oracle::summarize(means);
    CHECK(std::abs(sm.mean) < 4 * sm.se);
  }
}

TEST_CASE("update_mu against quadrature and Metropolis oracles") {
  ModelConfig c;
  c.mu_mean = 0.0;
  c.mu_var = 1.0;
  auto s = fixed_state({{0.0, 1.0}, {1.0, 1.0}}, {3, 2}, 0.0, 1.0, 1.0);

  // Unnormalised conditional: N(mu | a, A) * prod_j N(m_j | mu, tau V_j).
  auto log_target = [&](double mu) {
    double l = std::log(oracle::normal_pdf(mu, c.mu_mean, c.mu_var));
    for (const auto& cl : s.clusters) {
      l += std::log(oracle::normal_pdf(cl.theta.mean, mu, s.tau * cl.theta.variance));
    }
    return l;
  };
  auto target = [&](double mu) { return std::exp(log_target(mu)); };
  const double z = oracle::integrate_real_line(target);
  const double q_mean = oracle::integrate_real_line([&](double m) { return m * target(m); }) / z;
  const double q_var =
      oracle::integrate_real_line([&](double m) { return m * m * target(m); }) / z -
      q_mean * q_mean;
  CHECK(q_mean == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  CHECK(q_var == doctest::Approx(1.0 / 3.0).epsilon(1e-8));

  Rng rng(21);
  std::vector<double> mus;
  for (int r = 0; r < 200000; ++r) {
    update_mu(s, c, rng);
    mus.push_back(s.mu);
  }
  auto sm = oracle::summarize(mus);
  CHECK(std::abs(sm.mean - q_mean) < 3 * sm.se);
  CHECK(sm.variance == doctest::Approx(q_var).epsilon(0.01));

  const auto chain = oracle::metropolis(log_target, 0.0, 1.5, 400000, 22);
  const double mh_mean = oracle::summarize(chain).mean;
  const double mh_se = oracle::batch_means_se(chain);
  CHECK(std::abs(mh_mean - q_mean) < 4 * mh_se);
  CHECK(std::abs(mh_mean - sm.mean) < 4 * std::hypot(mh_se, sm.se));

  SUBCASE("tiny prior variance pins mu at its prior mean") {
    c.mu_mean = 4.0;
    c.mu_var = 1e-14;
    update_mu(s, c, rng);
    CHECK(s.mu == doctest::Approx(4.0).epsilon(1e-5));
  }
  SUBCASE("one cluster at the prior mean") {
    auto one = fixed_state({{0.0, 2.0}}, {4}, 0.0, 0.7, 1.0);
    std::vector<double> xs;
    for (int r = 0; r < 100000; ++r) {
      update_mu(one, c, rng);
      xs.push_back(one.mu);
    }
    auto so = oracle::summarize(xs);
    CHECK(std::abs(so.mean) < 3 * so.se);
  }
  SUBCASE("fixed mu is not updated") {
    c.fix_mu = 2.5;
    s.mu = 2.5;
    update_mu(s, c, rng);
    CHECK(s.mu == 2.5);
  }
}

TEST_CASE("update_tau against quadrature and Metropolis oracles") {
  ModelConfig c;
  c.tau_shape = 3.0;
  c.tau_scale = 2.0;
  auto s = fixed_state({{0.0, 1.0}, {1.0, 0.5}, {3.0, 2.0}}, {1, 1, 1}, 0.5, 1.0, 1.0);

  auto log_target = [&](double tau) -> double {
    if (tau <= 0.0) return -INFINITY;
    double l = std::log(oracle::inv_gamma_pdf(tau, c.tau_shape, c.tau_scale));
    for (const auto& cl : s.clusters) {
      l += std::log(oracle::normal_pdf(cl.theta.mean, s.mu, tau * cl.theta.variance));
    }
    return l;
  };
  auto target = [&](double t) { return std::exp(log_target(t)); };
  const double z = oracle::integrate_half_line(target);
  const double q_mean = oracle::integrate_half_line([&](double t) { return t * target(t); }) / z;

  Rng rng(31);
  std::vector<double> taus;
  for (int r = 0; r < 200000; ++r) {
    update_tau(s, c, rng);
    taus.push_back(s.tau);
  }
  auto st = oracle::summarize(taus);
  CHECK(std::abs(st.mean - q_mean) < 3 * st.se);

  const auto chain = oracle::metropolis(log_target, 1.0, 0.8, 400000, 32);
  const double mh_mean = oracle::summarize(chain).mean;
  const double mh_se = oracle::batch_means_se(chain);
  CHECK(std::abs(mh_mean - q_mean) < 4 * mh_se);
  CHECK(std::abs(mh_mean - st.mean) < 4 * std::hypot(mh_se, st.se));

  SUBCASE("fixed tau is not updated") {
    c.fix_tau = 0.25;
    s.tau = 0.25;
    update_tau(s, c, rng);
    CHECK(s.tau == 0.25);
  }
}

TEST_CASE("update_alpha against the griddy oracle") {
  ModelConfig c;
  auto long_run_mean = [&](std::size_t k, std::uint64_t seed) {
    std::vector<Component> comps;
    std::vector<std::size_t> sizes(k, 1);
    for (std::size_t j = 0; j < k; ++j) comps.push_back({static_cast<double>(j), 1.0});
    sizes[0] = 82 - (k - 1);
    auto s = fixed_state(comps, sizes, 0.0, 1.0, 1.0);
    REQUIRE(s.n() == 82);
    Rng rng(seed);
    std::vector<double> xs;
    for (int r = 0; r < 200000; ++r) {
      update_alpha(s, c, rng);
      xs.push_back(s.alpha);
    }
    return oracle::summarize(xs).mean;
  };

  const double oracle7 = oracle::alpha_posterior_mean(1.0, 2.0, 7.0, 82.0);
  const double mean7 = long_run_mean(7, 41);
  CHECK(std::abs(mean7 / oracle7 - 1.0) < 0.02);

  const double oracle3 = oracle::alpha_posterior_mean(1.0, 2.0, 3.0, 82.0);
  const double oracle12 = oracle::alpha_posterior_mean(1.0, 2.0, 12.0, 82.0);
  const double mean3 = long_run_mean(3, 42);
  const double mean12 = long_run_mean(12, 43);
  CHECK(std::abs(mean3 / oracle3 - 1.0) < 0.02);
  CHECK(std::abs(mean12 / oracle12 - 1.0) < 0.02);
  CHECK(mean12 > mean3);

  SUBCASE("fixed alpha is unchanged") {
    c.fix_alpha = 1.0;
    auto s = fixed_state({{0.0, 1.0}}, {10}, 0.0, 1.0, 1.0);
    Rng rng(44);
    for (int r = 0; r < 1000; ++r) update_alpha(s, c, rng);
    CHECK(s.alpha == 1.0);
  }
}

TEST_CASE("run_chain") {
  ModelConfig c;
  c.burnin = 50;
  c.thin = 2;

  SUBCASE("zero iterations") {
    c.iterations = 0;
    const std::vector<double> y{1.0, 2.0};
    CHECK(run_chain(y, c).empty());
  }
  SUBCASE("galaxies draws stay in range") {
    c.iterations = 100;
    const auto y = *builtin_dataset("galaxies");
    const auto draws = run_chain(y, c);
    CHECK(draws.size() == 100);
    for (const auto& d : draws) {
      CHECK(d.k >= 1);
      CHECK(d.k <= 82);
      CHECK(d.thetas.size() == 82);
      CHECK(count_components(d) == d.k);
      CHECK(d.tau > 0.0);
      CHECK(d.alpha > 0.0);
    }
  }
  SUBCASE("vanishing alpha collapses to one component") {
    c.fix_alpha = 1e-9;
    c.iterations = 200;
    const std::vector<double> y{-0.6, 0.3, 1.1, -1.4, 0.2, 0.8, -0.1, 0.5, -0.9, 1.6,
                                0.0, -0.3, 0.7, -1.1, 0.4, 1.2, -0.5, 0.1, -0.2, 0.9};
    const auto draws = run_chain(y, c);
    const auto ones = std::count_if(draws.begin(), draws.end(),
                                    [](const PosteriorDraw& d) { return d.k == 1; });
    CHECK(ones >= 198);
  }
  SUBCASE("bit-identical under a fixed seed") {
    c.iterations = 30;
    c.seed = 99;
    const auto a = run_chain(small_dataset(), c);
    const auto b = run_chain(small_dataset(), c);
    REQUIRE(a.size() == b.size());
    for (std::size_t t = 0; t < a.size(); ++t) {
      CHECK(a[t].thetas == b[t].thetas);
      CHECK(a[t].mu == b[t].mu);
      CHECK(a[t].tau == b[t].tau);
      CHECK(a[t].alpha == b[t].alpha);
    }
    c.seed = 100;
    const auto other = run_chain(small_dataset(), c);
    CHECK(other.back().thetas != a.back().thetas);
  }
  SUBCASE("errors propagate") {
    c.mu_var = -1.0;
    CHECK_THROWS_AS(run_chain(small_dataset(), c), ValidationError);
  }
}

TEST_CASE("count_components") {
  PosteriorDraw d;
  const Component a{0.0, 1.0}, b{1.0, 1.0}, e{0.0, 2.0};
  d.thetas = {a, a, a};
  CHECK(count_components(d) == 1);
  d.thetas = {a, b, e};
  CHECK(count_components(d) == 3);
  d.thetas = {a, b, a, e, b, b, e};
  CHECK(count_components(d) == 3);
  const auto dc = distinct_components(d.thetas);
  CHECK(dc.counts == std::vector<std::size_t>{2, 3, 2});
  CHECK(dc.labels == std::vector<std::size_t>{0, 1, 0, 2, 1, 1, 2});
}

TEST_CASE("partition invariants hold across sweeps") {
  ModelConfig c;
  Rng rng(50);
  const auto y = *builtin_dataset("galaxies");
  auto s = init_state(y, c, rng);
  for (int r = 0; r < 300; ++r) {
    sweep(s, c, rng);
    REQUIRE_NOTHROW(s.check_invariants());
    std::size_t total = 0;
    for (const auto& set : s.partition()) total += set.size();
    CHECK(total == s.n());
    CHECK(s.k() >= 1);
    CHECK(s.k() <= s.n());
  }
}

TEST_CASE("prior urn reproduces the Polya k distribution") {
  ModelConfig c;
  c.fix_mu = 0.0;
  c.fix_tau = 1.0;
  const double alpha = 1.5;
  const std::size_t n = 10;
  std::vector<double> y(n, 0.0);
  Rng rng(60);
  auto s = init_state(y, c, rng);
  s.alpha = alpha;

  const std::size_t samples = 20000, thin = 5;
  std::vector<double> hist(n + 1, 0.0);
  for (std::size_t t = 0; t < samples * thin + 100; ++t) {
    for (std::size_t i = 0; i < n; ++i) update_theta_prior(s, c, i, rng);
    if (t >= 100 && (t - 100) % thin == 0) hist[s.k()] += 1.0;
  }
  const auto probs = oracle::polya_urn_k_distribution(alpha, n);
  const auto test = oracle::chi_square_gof(hist, probs, static_cast<double>(samples));
  CHECK(test.p_value > 0.001);
}

TEST_CASE("posterior k is invariant to data order") {
  ModelConfig c;
  c.mu_mean = 1.0;
  c.mu_var = 10.0;
  c.burnin = 200;
  c.thin = 25;
  c.iterations = 3000;
  c.seed = 70;
  auto y = small_dataset();
  const auto a = run_chain(y, c);
  std::reverse(y.begin(), y.end());
  std::rotate(y.begin(), y.begin() + 7, y.end());
  c.seed = 71;
  const auto b = run_chain(y, c);
  const auto test = oracle::chi_square_two_sample(k_histogram(a, y.size()),
                                                  k_histogram(b, y.size()));
  CHECK(test.p_value > 0.01);
}
