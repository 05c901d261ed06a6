#pragma once

#include "follmer/bounds.hpp"
#include "follmer/experiments.hpp"
#include "follmer/io.hpp"
#include "follmer/measures.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace follmer {

// Either a named preset (optionally with a dimension override) or an explicit mixture.
struct PresetTarget {
    std::string name;
    std::optional<int> dim;
};
using TargetSpec = std::variant<PresetTarget, GaussianMixture>;

GaussianMixture resolve_target(const TargetSpec& spec);
Json target_spec_to_json(const TargetSpec& spec);

struct OutputSpec {
    std::optional<std::string> path;
    OutputFormat format = OutputFormat::Json;
};

// Configuration file layout (every key outside this layout is rejected):
//
//   {
//     "target":     {"preset": "mix-sym", "dim": 2}
//                 | {"mixture_file": "path.json"}       (resolved relative to the config)
//                 | {"mixture": {"dim": .., "sigma": .., "weights": [..], "centers": [[..], ..]}},
//     "grid":       {"steps": 256, "scheme": "uniform|cosine", "method": "rk4|euler", "eps_endpoint": 0},
//     "experiment": {"kind": "marginal|lipschitz|estimator|concentration|time_change|reverse_sde|functional",
//                    ...kind-specific parameters, see experiment_params_to_json},
//     "seed":       <unsigned 64-bit integer>,
//     "n":          <number of pushed samples written by `sample`>,
//     "output":     {"path": "out.json", "format": "json|csv"}
//   }
struct RunConfig {
    TargetSpec target = PresetTarget{"std-gaussian", std::nullopt};
    GridSpec grid;
    std::optional<ExperimentParams> experiment;
    std::optional<std::uint64_t> seed;
    Eigen::Index n = 1000;
    OutputSpec output;
};

// Throws ConfigError on unknown keys, wrong types or out-of-range values.
RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
Json parse_json_file(const std::filesystem::path& path);

Json grid_to_json(const GridSpec& g);
Json experiment_params_to_json(const ExperimentParams& p);
ExperimentParams experiment_params_from_json(const Json& j);

// Complete config that reproduces a run: target, grid (for flow-based kinds),
// experiment and seed.
Json snapshot_config(const TargetSpec& target, const ExperimentParams& params, const GridSpec& grid,
                     std::uint64_t seed);

// Resolves the target, runs the configured experiment and stores a snapshot
// that keeps the target in its configured form. Throws ConfigError when the
// config has no seed or no experiment.
ExperimentReport run_config(const RunConfig& cfg, unsigned threads);

// Input of the `bounds` subcommand:
//
//   {"kappa": 4 | "-inf", "beta": .. | "inf", "D": .. | "inf",
//    "mixture": {"sigma": 1, "R": 1},
//    "q": [2, 4],
//    "affine": {"lambda_min": .., "lambda_max": .., "R": ..},
//    "concentration": {"d": 2, "n": 1000, "eps": 0.1, "fifth_moment": 1, "c_d": 1}}
//
// A mixture file (dim, sigma, weights, centers) is accepted as well and
// replaced by its convexity profile.
struct BoundsInput {
    ConvexityProfile profile;
    std::vector<int> q{2};
    std::optional<AffineConstants> affine;
    struct Concentration {
        int d = 1;
        std::int64_t n = 1;
        double eps = 0.1;
        double fifth_moment = 0.0;
        double c_d = 1.0;
    };
    std::optional<Concentration> concentration;
};

BoundsInput parse_bounds_input(const Json& j);
// Throws DomainError when the profile admits no branch.
Json bounds_report(const BoundsInput& in);

} // namespace follmer
