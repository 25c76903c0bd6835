#include "polyamix/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace polyamix {

namespace {

void require_shared_grid(std::span<const GridFunction> fns) {
  if (fns.empty()) throw DomainError("no functions given");
  const auto& g = fns.front().grid;
  for (const auto& f : fns) {
    if (f.grid != g || f.values.size() != g.size()) {
      throw DomainError("functions do not share a grid");
    }
  }
}

// Linear-interpolation sample quantile of sorted data (R type 7).
double quantile_sorted(std::span<const double> sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double BandSet::mean_width() const {
  if (grid.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) total += upper[g] - lower[g];
  return total / static_cast<double>(grid.size());
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
  if (!(lo < hi) || points < 2) throw DomainError("grid needs lo < hi and >= 2 points");
  std::vector<double> g(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) g[i] = lo + step * static_cast<double>(i);
  g.back() = hi;
  return g;
}

std::vector<double> default_grid(std::span<const double> data, std::size_t points) {
  if (data.empty()) throw DomainError("default grid needs data");
  const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
  double span = *hi - *lo;
  if (span <= 0.0) span = std::max(1.0, std::abs(*lo));
  return uniform_grid(*lo - 0.15 * span, *hi + 0.15 * span, points);
}

std::vector<double> moment_grid(const MixtureDensity& mix, std::size_t min_points,
                                std::size_t max_points) {
  if (mix.size() == 0) throw DomainError("empty mixture");
  double lo = INFINITY, hi = -INFINITY, sd_min = INFINITY;
  for (const auto& c : mix.components) {
    const double sd = std::sqrt(c.variance);
    lo = std::min(lo, c.mean - 12.0 * sd);
    hi = std::max(hi, c.mean + 12.0 * sd);
    sd_min = std::min(sd_min, sd);
  }
  const double wanted = std::ceil((hi - lo) / (0.5 * sd_min)) + 1.0;
  const auto points = static_cast<std::size_t>(
      std::clamp(wanted, static_cast<double>(min_points), static_cast<double>(max_points)));
  return uniform_grid(lo, hi, points);
}

GridFunction eval_density(const MixtureDensity& mix, std::span<const double> grid) {
  GridFunction out{{grid.begin(), grid.end()}, std::vector<double>(grid.size(), 0.0)};
  for (std::size_t j = 0; j < mix.size(); ++j) {
    const auto& c = mix.components[j];
    const double norm = mix.weights[j] / std::sqrt(2.0 * M_PI * c.variance);
    const double half_prec = 0.5 / c.variance;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double z = grid[g] - c.mean;
      out.values[g] += norm * std::exp(-half_prec * z * z);
    }
  }
  return out;
}

GridFunction eval_cdf(const MixtureDensity& mix, std::span<const double> grid) {
  GridFunction out{{grid.begin(), grid.end()}, std::vector<double>(grid.size(), 0.0)};
  for (std::size_t j = 0; j < mix.size(); ++j) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      out.values[g] += mix.weights[j] * normal_cdf(grid[g], mix.components[j]);
    }
  }
  for (auto& v : out.values) v = std::clamp(v, 0.0, 1.0);
  return out;
}

std::vector<double> count_modes(const MixtureDensity& mix, std::pair<double, double> range,
                                std::size_t resolution) {
  if (!(range.first < range.second)) throw DomainError("mode range needs lo < hi");
  if (resolution < 3) throw DomainError("mode resolution must be at least 3");
  const auto grid = uniform_grid(range.first, range.second, resolution);
  const auto f = eval_density(mix, grid).values;
  // A run of equal values above both neighbours counts once, at its centre.
  std::vector<double> modes;
  for (std::size_t i = 1; i + 1 < f.size();) {
    std::size_t j = i;
    while (j + 1 < f.size() && f[j + 1] == f[i]) ++j;
    if (j + 1 < f.size() && f[i] > f[i - 1] && f[j] > f[j + 1]) {
      modes.push_back(0.5 * (grid[i] + grid[j]));
    }
    i = j + 1;
  }
  return modes;
}

Moments moments_trapezoid(const GridFunction& fn) {
  const auto& x = fn.grid;
  const auto& f = fn.values;
  if (x.size() != f.size() || x.size() < 2) throw DomainError("moments need >= 2 grid points");
  double mass = 0.0, first = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double h = 0.5 * (x[i] - x[i - 1]);
    mass += h * (f[i] + f[i - 1]);
    first += h * (x[i] * f[i] + x[i - 1] * f[i - 1]);
  }
  Moments m;
  m.mass = mass;
  m.low_mass = mass < 0.99;
  if (!(mass > 0.0)) return m;
  m.mean = first / mass;
  double second = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double h = 0.5 * (x[i] - x[i - 1]);
    const double a = x[i] - m.mean, b = x[i - 1] - m.mean;
    second += h * (a * a * f[i] + b * b * f[i - 1]);
  }
  m.variance = second / mass;
  return m;
}

GridFunction pointwise_mean(std::span<const GridFunction> fns) {
  require_shared_grid(fns);
  GridFunction out{fns.front().grid, std::vector<double>(fns.front().grid.size(), 0.0)};
  for (const auto& f : fns) {
    for (std::size_t g = 0; g < f.values.size(); ++g) out.values[g] += f.values[g];
  }
  const double t = static_cast<double>(fns.size());
  for (auto& v : out.values) v /= t;
  return out;
}

GridFunction pointwise_variance(std::span<const GridFunction> fns) {
  const GridFunction mean = pointwise_mean(fns);
  GridFunction out{mean.grid, std::vector<double>(mean.grid.size(), 0.0)};
  for (const auto& f : fns) {
    for (std::size_t g = 0; g < f.values.size(); ++g) {
      const double d = f.values[g] - mean.values[g];
      out.values[g] += d * d;
    }
  }
  const double denom = fns.size() > 1 ? static_cast<double>(fns.size() - 1) : 1.0;
  for (auto& v : out.values) v /= denom;
  return out;
}

BandSet bands(std::span<const GridFunction> fns, double level, BandKind kind) {
  if (fns.size() < 20) throw DomainError("bands need at least 20 functions");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("band level must lie in (0,1)");
  require_shared_grid(fns);

  const std::size_t points = fns.front().grid.size();
  BandSet out;
  out.grid = fns.front().grid;
  out.kind = kind;
  out.level = level;
  out.lower.assign(points, 0.0);
  out.upper.assign(points, 0.0);

  if (kind == BandKind::pointwise) {
    std::vector<double> column(fns.size());
    const double tail = 0.5 * (1.0 - level);
    for (std::size_t g = 0; g < points; ++g) {
      for (std::size_t t = 0; t < fns.size(); ++t) column[t] = fns[t].values[g];
      std::sort(column.begin(), column.end());
      out.lower[g] = quantile_sorted(column, tail);
      out.upper[g] = quantile_sorted(column, 1.0 - tail);
    }
    return out;
  }

  const GridFunction centre = pointwise_mean(fns);
  std::vector<double> dist(fns.size(), 0.0);
  for (std::size_t t = 0; t < fns.size(); ++t) {
    for (std::size_t g = 0; g < points; ++g) {
      dist[t] = std::max(dist[t], std::abs(fns[t].values[g] - centre.values[g]));
    }
  }
  std::vector<std::size_t> order(fns.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  const auto keep = static_cast<std::size_t>(
      std::ceil(level * static_cast<double>(fns.size()) - 1e-9));

  // Envelope of the closest paths, merged into the pointwise band.
  out = bands(fns, level, BandKind::pointwise);
  out.kind = BandKind::simultaneous;
  for (std::size_t r = 0; r < keep; ++r) {
    const auto& f = fns[order[r]].values;
    for (std::size_t g = 0; g < points; ++g) {
      out.lower[g] = std::min(out.lower[g], f[g]);
      out.upper[g] = std::max(out.upper[g], f[g]);
    }
  }
  return out;
}

}  // namespace polyamix
