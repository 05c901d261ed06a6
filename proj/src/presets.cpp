#include "follmer/presets.hpp"

#include <cmath>

namespace follmer {

namespace {

GaussianMixture symmetric_pair(double offset, int dim)
{
    const Vector e1 = Vector::Unit(dim, 0);
    return GaussianMixture({0.5, 0.5}, {-offset * e1, offset * e1}, 1.0);
}

} // namespace

GaussianMixture gaussian_with_precision(double beta, int dim)
{
    if (!(beta > 0.0)) throw DomainError("gaussian_with_precision: beta must be positive");
    if (dim < 1) throw DimensionError("gaussian_with_precision: dim must be >= 1");
    return GaussianMixture({1.0}, {Vector::Zero(dim)}, 1.0 / std::sqrt(beta));
}

std::vector<std::string> preset_names()
{
    return {"std-gaussian", "gauss-beta4", "mix-sym", "mix-r1", "mix-asym", "mix-d6"};
}

GaussianMixture preset(const std::string& name, std::optional<int> dim)
{
    if (dim && *dim < 1) throw ConfigError("preset '" + name + "': dim must be >= 1");
    if (name == "std-gaussian") return gaussian_with_precision(1.0, dim.value_or(2));
    if (name == "gauss-beta4") return gaussian_with_precision(4.0, dim.value_or(2));
    if (name == "mix-sym") return symmetric_pair(2.0, dim.value_or(2));
    if (name == "mix-r1") return symmetric_pair(1.0, dim.value_or(2));
    if (name == "mix-d6") return symmetric_pair(1.0, dim.value_or(6));
    if (name == "mix-asym") {
        if (dim && *dim != 2) throw ConfigError("preset 'mix-asym' is two-dimensional");
        Vector a(2), b(2), c(2);
        a << 1.5, 0.0;
        b << -1.0, 1.0;
        c << 0.0, -1.2;
        return GaussianMixture({0.2, 0.3, 0.5}, {a, b, c}, 0.8);
    }
    throw ConfigError("unknown preset '" + name + "'");
}

} // namespace follmer
