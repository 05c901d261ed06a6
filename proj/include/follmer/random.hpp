#pragma once

#include "follmer/common.hpp"

#include <cstdint>
#include <random>

namespace follmer {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent substreams.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stream owned by task `index` of a computation seeded with `master`. The result
// depends only on (master, index), never on scheduling.
inline Rng substream(std::uint64_t master, std::uint64_t index)
{
    return Rng(mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL)));
}

// Stream for a named stage of an experiment, so that stages do not share draws.
inline std::uint64_t stage_seed(std::uint64_t master, std::uint64_t stage)
{
    return mix64(master ^ (0xd1b54a32d192ed03ULL * (stage + 1)));
}

inline Vector standard_normal(Rng& rng, Eigen::Index dim)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(dim);
    for (Eigen::Index i = 0; i < dim; ++i) z[i] = normal(rng);
    return z;
}

inline Vector random_unit_vector(Rng& rng, Eigen::Index dim)
{
    for (;;) {
        Vector z = standard_normal(rng, dim);
        const double norm = z.norm();
        if (norm > 1e-12) return z / norm;
    }
}

} // namespace follmer
