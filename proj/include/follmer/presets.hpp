#pragma once

#include "follmer/measures.hpp"

#include <optional>
#include <string>
#include <vector>

namespace follmer {

// Named targets shipped with the library:
//   std-gaussian  N(0, I)                                         (default d = 2)
//   gauss-beta4   N(0, I/4)                                       (default d = 2)
//   mix-sym       (1/2) N(-2 e1, I) + (1/2) N(2 e1, I)            (default d = 2)
//   mix-r1        (1/2) N(-e1, I) + (1/2) N(e1, I)                (default d = 2)
//   mix-asym      three components, sigma = 0.8                    (d = 2 only)
//   mix-d6        (1/2) N(-e1, I) + (1/2) N(e1, I)                (default d = 6)
GaussianMixture preset(const std::string& name, std::optional<int> dim = std::nullopt);
std::vector<std::string> preset_names();

// N(0, I / beta) as a single-component mixture.
GaussianMixture gaussian_with_precision(double beta, int dim);

} // namespace follmer
