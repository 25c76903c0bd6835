#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace polyamix {

// Velocities (km/s) of 82 galaxies from six well-separated conic sections of
// the Corona Borealis region; as distributed with the R package MASS
// (`MASS::galaxies`, Roeder 1990).
const std::vector<double>& galaxies_kms();

// Builtin dataset by name, already scaled for modelling (galaxies: /1000).
std::optional<std::vector<double>> builtin_dataset(std::string_view name);

}  // namespace polyamix
