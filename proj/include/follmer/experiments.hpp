#pragma once

#include "follmer/flow.hpp"
#include "follmer/measures.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace follmer {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportSchemaVersion = "1";

enum class Comparison {
    AtMostScaled,  // estimate <= tolerance * bound_or_target
    AtMostPlus,    // estimate <= bound_or_target + tolerance
    Within,        // |estimate - bound_or_target| <= tolerance
    AtLeast,       // estimate >= tolerance * bound_or_target
};

std::string to_string(Comparison c);

struct CheckRecord {
    std::string name;
    double estimate = 0.0;
    double bound_or_target = 0.0;
    double tolerance = 0.0;
    Comparison comparison = Comparison::AtMostScaled;
    bool pass = false;
};

CheckRecord make_record(std::string name, double estimate, double bound_or_target, double tolerance,
                        Comparison comparison);

struct ExperimentReport {
    std::string experiment_id;
    Json config;            // re-runnable snapshot, see config.hpp
    std::uint64_t seed = 0;
    std::vector<CheckRecord> records;
    Json details = Json::object();  // supporting tables
    double wall_clock_seconds = 0.0;

    bool passed() const;
    // Everything except timing; identical for any thread count.
    Json body() const;
    // body() plus a trailing "timing" object.
    Json to_json() const;
    // One row per record.
    std::string records_csv() const;
};

struct GridSpec {
    int steps = 256;
    GridScheme scheme = GridScheme::Uniform;
    Method method = Method::Rk4;
    double eps_endpoint = 0.0;  // integrate to 1 - eps_endpoint

    TimeGrid make() const;
};

struct MarginalParams {
    std::vector<double> t_list{0.25, 0.5, 0.75, 1.0};
    Eigen::Index n = 5000;
    int n_proj = 128;
    double floor_factor = 3.0;
};

struct LipschitzParams {
    Eigen::Index n_points = 500;
    double tolerance = 1.02;
    double envelope_slack = 0.02;  // additive slack on the growth envelope along the path
};

struct EstimatorParams {
    std::vector<double> t_list{0.25, 0.5, 0.75};
    std::vector<double> x_list{-1.0, 0.0, 1.0};  // multiples of e_1
    std::vector<std::int64_t> n_list{1000, 10000, 100000, 1000000};
    int repeats = 4;
    double slope_low = -0.65;
    double slope_high = -0.35;
    double stderr_factor = 4.0;
};

struct ConcentrationParams {
    std::vector<Eigen::Index> n_list{250, 500, 1000, 2000, 4000};
    int repeats = 20;
    Eigen::Index reference_n = 200000;
    int n_proj = 64;
    double eps = 0.1;
    double slope_tolerance = 0.15;
};

struct TimeChangeParams {
    double s_max = 6.0;
    int resolution = 1000;
    Eigen::Index n_points = 8;
    double threshold = 5e-3;
    // Number of successive halvings below `resolution` used for the refinement check.
    int refinement_levels = 3;
    double refinement_ratio = 2.0;
    // Deviations below this are treated as converged to round-off.
    double roundoff_floor = 1e-11;
};

struct ReverseSdeParams {
    double t = 0.5;
    Eigen::Index n = 10000;
    int steps = 400;
    double eps = 1e-3;
    int n_proj = 128;
    double floor_factor = 3.0;
};

struct FunctionalParams {
    Eigen::Index n = 100000;
    int bootstrap = 50;
    double stderr_factor = 3.0;
};

using ExperimentParams = std::variant<MarginalParams, LipschitzParams, EstimatorParams, ConcentrationParams,
                                      TimeChangeParams, ReverseSdeParams, FunctionalParams>;

std::string experiment_kind(const ExperimentParams& p);

struct RunContext {
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

// Sliced W2 between flow marginals and direct draws of t X + sqrt(1 - t^2) Z,
// each against the floor between two independent direct sample sets.
ExperimentReport run_marginal_check(const GaussianMixture& target, const MarginalParams& p, const GridSpec& grid,
                                    const RunContext& ctx);

// Largest Jacobian operator norm of the time-1 map over Gaussian starts and
// the empirical pairwise Lipschitz ratio, both against exp(int theta).
ExperimentReport run_lipschitz_check(const GaussianMixture& target, const LipschitzParams& p, const GridSpec& grid,
                                     const RunContext& ctx);

// Monte Carlo velocity against the exact field over a (t, x) grid and sample sizes.
ExperimentReport run_estimator_consistency(const GaussianMixture& target, const EstimatorParams& p,
                                           const RunContext& ctx);

// Decay of W2(nu_n, nu), approximated by sliced W2 against a large reference
// sample, and the spread of that distance across repeats.
ExperimentReport run_concentration(const GaussianMixture& target, const ConcentrationParams& p,
                                   const RunContext& ctx);

ExperimentReport run_time_change(const GaussianMixture& target, const TimeChangeParams& p, const RunContext& ctx);

// Euler-Maruyama marginal of the reversed SDE against (1 - t) X + sqrt(t (2 - t)) Y.
ExperimentReport run_reverse_sde(const GaussianMixture& target, const ReverseSdeParams& p, const RunContext& ctx);

// Empirical Poincare and log-Sobolev lower estimates against the transferred constants.
ExperimentReport run_functional(const GaussianMixture& target, const FunctionalParams& p, const RunContext& ctx);

ExperimentReport run_experiment(const GaussianMixture& target, const ExperimentParams& params, const GridSpec& grid,
                                const RunContext& ctx);

// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

} // namespace follmer
