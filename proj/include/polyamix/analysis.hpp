#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "polyamix/completion.hpp"

namespace polyamix {

struct GridFunction {
  std::vector<double> grid;
  std::vector<double> values;
};

enum class BandKind { pointwise, simultaneous };

struct BandSet {
  std::vector<double> grid;
  std::vector<double> lower;
  std::vector<double> upper;
  BandKind kind = BandKind::pointwise;
  double level = 0.95;

  double mean_width() const;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double mass = 0.0;        // trapezoid mass of the input before renormalizing
  bool low_mass = false;    // mass < 0.99: grid misses part of the distribution
};

// `points` equally spaced values on [lo, hi].
std::vector<double> uniform_grid(double lo, double hi, std::size_t points);

// 1000 points spanning the data range widened by 15% on each side.
std::vector<double> default_grid(std::span<const double> data, std::size_t points = 1000);

// Grid wide enough to hold all but a negligible part of the mixture, with
// spacing no coarser than half the smallest component standard deviation.
// Used for moment integration.
std::vector<double> moment_grid(const MixtureDensity& mix, std::size_t min_points = 2001,
                                std::size_t max_points = 200001);

GridFunction eval_density(const MixtureDensity& mix, std::span<const double> grid);
GridFunction eval_cdf(const MixtureDensity& mix, std::span<const double> grid);

// Interior local maxima of the density on `resolution` equally spaced points
// over [lo, hi]: points (or flat runs of points) strictly above both
// neighbours. Endpoints never count.
std::vector<double> count_modes(const MixtureDensity& mix, std::pair<double, double> range,
                                std::size_t resolution = 512);

Moments moments_trapezoid(const GridFunction& fn);

GridFunction pointwise_mean(std::span<const GridFunction> fns);

// Per-point variance across functions on a shared grid.
GridFunction pointwise_variance(std::span<const GridFunction> fns);

// Pointwise: per-point empirical quantiles at (1-level)/2 and 1-(1-level)/2.
// Simultaneous: envelope of the ceil(level*T) functions closest to the
// pointwise mean in sup norm, widened where needed to contain the pointwise
// band.
BandSet bands(std::span<const GridFunction> fns, double level, BandKind kind);

}  // namespace polyamix
