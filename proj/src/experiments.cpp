#include "follmer/experiments.hpp"

#include "follmer/bounds.hpp"
#include "follmer/config.hpp"
#include "follmer/io.hpp"
#include "follmer/metrics.hpp"
#include "follmer/parallel.hpp"
#include "follmer/velocity.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

namespace follmer {

std::string to_string(Comparison c)
{
    switch (c) {
    case Comparison::AtMostScaled: return "estimate <= tolerance * bound_or_target";
    case Comparison::AtMostPlus: return "estimate <= bound_or_target + tolerance";
    case Comparison::Within: return "|estimate - bound_or_target| <= tolerance";
    case Comparison::AtLeast: return "estimate >= tolerance * bound_or_target";
    }
    return "unknown";
}

CheckRecord make_record(std::string name, double estimate, double bound_or_target, double tolerance,
                        Comparison comparison)
{
    CheckRecord r{std::move(name), estimate, bound_or_target, tolerance, comparison, false};
    switch (comparison) {
    case Comparison::AtMostScaled: r.pass = estimate <= tolerance * bound_or_target; break;
    case Comparison::AtMostPlus: r.pass = estimate <= bound_or_target + tolerance; break;
    case Comparison::Within: r.pass = std::abs(estimate - bound_or_target) <= tolerance; break;
    case Comparison::AtLeast: r.pass = estimate >= tolerance * bound_or_target; break;
    }
    // NaN compares false everywhere above, so a non-finite estimate fails.
    return r;
}

bool ExperimentReport::passed() const
{
    return !records.empty() && std::all_of(records.begin(), records.end(), [](const CheckRecord& r) { return r.pass; });
}

Json ExperimentReport::body() const
{
    Json out;
    out["schema_version"] = kReportSchemaVersion;
    out["experiment_id"] = experiment_id;
    out["seed"] = seed;
    out["config"] = config;
    Json recs = Json::array();
    for (const auto& r : records) {
        recs.push_back({{"name", r.name},
                        {"estimate", json_number(r.estimate)},
                        {"bound_or_target", json_number(r.bound_or_target)},
                        {"tolerance", json_number(r.tolerance)},
                        {"comparison", to_string(r.comparison)},
                        {"pass", r.pass}});
    }
    out["records"] = std::move(recs);
    out["details"] = details;
    out["passed"] = passed();
    return out;
}

Json ExperimentReport::to_json() const
{
    Json out = body();
    out["timing"] = {{"wall_clock_seconds", wall_clock_seconds}};
    return out;
}

std::string ExperimentReport::records_csv() const
{
    std::ostringstream os;
    os << "experiment_id,seed,name,estimate,bound_or_target,tolerance,pass\n";
    for (const auto& r : records) {
        os << experiment_id << ',' << seed << ',' << r.name << ',' << format_double(r.estimate) << ','
           << format_double(r.bound_or_target) << ',' << format_double(r.tolerance) << ','
           << (r.pass ? "true" : "false") << '\n';
    }
    return os.str();
}

TimeGrid GridSpec::make() const
{
    if (!(eps_endpoint >= 0.0 && eps_endpoint < 1.0)) throw DomainError("grid: eps_endpoint must lie in [0, 1)");
    return TimeGrid::make(scheme, steps, 1.0 - eps_endpoint);
}

std::string experiment_kind(const ExperimentParams& p)
{
    struct Visitor {
        std::string operator()(const MarginalParams&) const { return "marginal"; }
        std::string operator()(const LipschitzParams&) const { return "lipschitz"; }
        std::string operator()(const EstimatorParams&) const { return "estimator"; }
        std::string operator()(const ConcentrationParams&) const { return "concentration"; }
        std::string operator()(const TimeChangeParams&) const { return "time_change"; }
        std::string operator()(const ReverseSdeParams&) const { return "reverse_sde"; }
        std::string operator()(const FunctionalParams&) const { return "functional"; }
    };
    return std::visit(Visitor{}, p);
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw DomainError("log_log_slope: need at least two matched points");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    if (!(sxx > 0.0)) throw DomainError("log_log_slope: x values must not all coincide");
    return sxy / sxx;
}

double quantile(std::vector<double> values, double q)
{
    if (values.empty()) throw DomainError("quantile: empty input");
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile: q must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

using Clock = std::chrono::steady_clock;

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

private:
    Clock::time_point start_ = Clock::now();
};

ExperimentReport start_report(const GaussianMixture& target, const ExperimentParams& params, const GridSpec& grid,
                              const RunContext& ctx)
{
    ExperimentReport r;
    r.experiment_id = experiment_kind(params);
    r.seed = ctx.seed;
    r.config = snapshot_config(target, params, grid, ctx.seed);
    return r;
}

// n draws of the target, particle i from substream (seed, i).
SampleSet target_samples(const GaussianMixture& target, Eigen::Index n, std::uint64_t seed, unsigned threads)
{
    SampleSet out;
    out.points.resize(n, target.dim());
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
        Rng rng = substream(seed, i);
        out.points.row(static_cast<Eigen::Index>(i)) = target.sample(rng).transpose();
    });
    out.provenance = "target(seed=" + std::to_string(seed) + ")";
    return out;
}

// n draws of a X + b Z with X from the target and Z standard Gaussian.
SampleSet interpolated_samples(const GaussianMixture& target, double a, double b, Eigen::Index n, std::uint64_t seed,
                               unsigned threads)
{
    SampleSet out;
    const Eigen::Index d = target.dim();
    out.points.resize(n, d);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
        Rng rng = substream(seed, i);
        const Vector x = target.sample(rng);
        const Vector z = standard_normal(rng, d);
        out.points.row(static_cast<Eigen::Index>(i)) = (a * x + b * z).transpose();
    });
    out.provenance = "interpolated(seed=" + std::to_string(seed) + ")";
    return out;
}

// Grid with every requested time inserted as a node.
TimeGrid grid_with_nodes(const TimeGrid& base, const std::vector<double>& times)
{
    std::vector<double> nodes = base.nodes();
    bool changed = false;
    for (double t : times) {
        if (t > base.back() + 1e-12) throw DomainError("requested time lies beyond the end of the grid");
        if (!base.find(t)) {
            nodes.push_back(t);
            changed = true;
        }
    }
    if (!changed) return base;
    std::sort(nodes.begin(), nodes.end());
    return TimeGrid::custom(std::move(nodes));
}

std::string label(const std::string& prefix, double value) { return prefix + format_double(value); }

} // namespace

ExperimentReport run_marginal_check(const GaussianMixture& target, const MarginalParams& p, const GridSpec& grid_spec,
                                    const RunContext& ctx)
{
    const Stopwatch clock;
    if (p.n < 2) throw DomainError("marginal: n must be >= 2");
    if (p.n_proj < 1) throw DomainError("marginal: n_proj must be >= 1");
    if (p.t_list.empty()) throw DomainError("marginal: t_list is empty");
    for (double t : p.t_list) {
        if (!(t > 0.0 && t <= 1.0)) throw DomainError("marginal: times must lie in (0, 1]");
    }

    ExperimentReport report = start_report(target, p, grid_spec, ctx);
    const TimeGrid grid = grid_with_nodes(grid_spec.make(), p.t_list);
    std::vector<std::size_t> idx;
    for (double t : p.t_list) idx.push_back(*grid.find(t));

    const Eigen::Index d = target.dim();
    const auto flow = push_forward_marginals(exact_velocity_field(target), d, p.n, grid, grid_spec.method, idx,
                                             {stage_seed(ctx.seed, 0), ctx.threads});
    Rng dir_rng(stage_seed(ctx.seed, 1));
    const Matrix directions = random_directions(d, p.n_proj, dir_rng);

    Json table = Json::array();
    for (std::size_t k = 0; k < p.t_list.size(); ++k) {
        const double t = grid.nodes()[idx[k]];
        const double b = std::sqrt(std::max(0.0, 1.0 - t * t));
        const SampleSet direct_a = interpolated_samples(target, t, b, p.n, stage_seed(ctx.seed, 10 + 2 * k), ctx.threads);
        const SampleSet direct_b = interpolated_samples(target, t, b, p.n, stage_seed(ctx.seed, 11 + 2 * k), ctx.threads);
        const SlicedEstimate dist = sliced_w2(flow[k], direct_a, directions, ctx.threads);
        const SlicedEstimate floor = sliced_w2(direct_a, direct_b, directions, ctx.threads);
        report.records.push_back(make_record(label("marginal_sliced_w2_t=", t), dist.value, floor.value,
                                             p.floor_factor, Comparison::AtMostScaled));
        table.push_back({{"t", t},
                         {"sliced_w2", dist.value},
                         {"sliced_w2_stderr", dist.stderr_},
                         {"floor", floor.value},
                         {"floor_stderr", floor.stderr_}});
    }
    report.details["grid_nodes"] = grid.steps();
    report.details["marginals"] = std::move(table);
    report.wall_clock_seconds = clock.seconds();
    return report;
}

ExperimentReport run_lipschitz_check(const GaussianMixture& target, const LipschitzParams& p,
                                     const GridSpec& grid_spec, const RunContext& ctx)
{
    const Stopwatch clock;
    if (p.n_points < 2) throw DomainError("lipschitz: n_points must be >= 2");

    ExperimentReport report = start_report(target, p, grid_spec, ctx);
    const TimeGrid grid = grid_spec.make();
    const ThetaProfile theta = theta_profile(target.profile());
    const double L = theta.lipschitz_constant();

    const Eigen::Index d = target.dim();
    const SampleSet inputs = gaussian_inputs(d, p.n_points, stage_seed(ctx.seed, 0));
    const VelocityField v = exact_velocity_field(target);
    const JacobianField jac = exact_jacobian_field(target);

    std::vector<double> growth(grid.nodes().size());
    for (std::size_t k = 0; k < growth.size(); ++k) growth[k] = theta.growth_bound(grid.nodes()[k]);

    Matrix finals(p.n_points, d);
    std::vector<double> final_norm(static_cast<std::size_t>(p.n_points));
    std::vector<double> excess(static_cast<std::size_t>(p.n_points));
    parallel_for(static_cast<std::size_t>(p.n_points), ctx.threads, [&](std::size_t i) {
        const auto row = static_cast<Eigen::Index>(i);
        const Trajectory traj = jacobian_along_flow(v, jac, inputs.points.row(row).transpose(), grid, grid_spec.method);
        finals.row(row) = traj.final_state().transpose();
        final_norm[i] = traj.op_norms.back();
        double worst = -kInf;
        for (std::size_t k = 0; k < traj.op_norms.size(); ++k) worst = std::max(worst, traj.op_norms[k] - growth[k]);
        excess[i] = worst;
    });

    const auto arg = std::max_element(final_norm.begin(), final_norm.end()) - final_norm.begin();
    const double max_norm = final_norm[static_cast<std::size_t>(arg)];
    const double emp = empirical_lipschitz(inputs.points, finals);
    const double max_excess = *std::max_element(excess.begin(), excess.end());

    report.records.push_back(make_record("max_jacobian_opnorm", max_norm, L, p.tolerance, Comparison::AtMostScaled));
    report.records.push_back(make_record("empirical_lipschitz", emp, L, p.tolerance, Comparison::AtMostScaled));
    report.records.push_back(
        make_record("opnorm_minus_growth_envelope", max_excess, 0.0, p.envelope_slack, Comparison::AtMostPlus));
    report.details["theta_case"] = to_string(theta.case_tag());
    report.details["lipschitz_constant"] = L;
    report.details["argmax_start"] = json_vector(inputs.points.row(arg).transpose());
    report.wall_clock_seconds = clock.seconds();
    return report;
}

ExperimentReport run_estimator_consistency(const GaussianMixture& target, const EstimatorParams& p,
                                           const RunContext& ctx)
{
    const Stopwatch clock;
    if (p.t_list.empty() || p.x_list.empty()) throw DomainError("estimator: t_list and x_list must be nonempty");
    if (p.n_list.size() < 2) throw DomainError("estimator: n_list needs at least two sizes");
    if (p.repeats < 1) throw DomainError("estimator: repeats must be >= 1");

    ExperimentReport report = start_report(target, p, GridSpec{}, ctx);
    const Eigen::Index d = target.dim();
    const std::size_t nt = p.t_list.size(), nx = p.x_list.size(), nn = p.n_list.size();
    const auto reps = static_cast<std::size_t>(p.repeats);
    const std::size_t tasks = nt * nx * nn * reps;

    std::vector<double> err(tasks), zscore(tasks), stderr_(tasks);
    const std::uint64_t base = stage_seed(ctx.seed, 0);
    parallel_for(tasks, ctx.threads, [&](std::size_t task) {
        std::size_t rem = task;
        const std::size_t r = rem % reps;
        rem /= reps;
        const std::size_t in = rem % nn;
        rem /= nn;
        const std::size_t ix = rem % nx;
        const std::size_t it = rem / nx;
        (void)r;
        const double t = p.t_list[it];
        const Vector x = p.x_list[ix] * Vector::Unit(d, 0);
        Rng rng = substream(base, task);
        const VelocityEval mc = velocity_mc(target, t, x, p.n_list[in], rng);
        const Vector exact = velocity_exact(target, t, x).value;
        const Vector diff = mc.value - exact;
        err[task] = diff.norm();
        stderr_[task] = *mc.mc_stderr;
        zscore[task] = diff.cwiseAbs().maxCoeff() / *mc.mc_stderr;
    });

    std::vector<double> ns, rms;
    Json table = Json::array();
    for (std::size_t in = 0; in < nn; ++in) {
        double sq = 0.0, worst_z = 0.0;
        std::size_t count = 0;
        for (std::size_t it = 0; it < nt; ++it) {
            for (std::size_t ix = 0; ix < nx; ++ix) {
                for (std::size_t r = 0; r < reps; ++r) {
                    const std::size_t task = ((it * nx + ix) * nn + in) * reps + r;
                    sq += err[task] * err[task];
                    worst_z = std::max(worst_z, zscore[task]);
                    ++count;
                }
            }
        }
        const double value = std::sqrt(sq / static_cast<double>(count));
        ns.push_back(static_cast<double>(p.n_list[in]));
        rms.push_back(value);
        table.push_back({{"n", p.n_list[in]}, {"rms_error", value}, {"max_zscore", worst_z}});
    }
    const double slope = log_log_slope(ns, rms);
    const double max_z = *std::max_element(zscore.begin(), zscore.end());
    report.records.push_back(make_record("error_slope", slope, 0.5 * (p.slope_low + p.slope_high),
                                         0.5 * (p.slope_high - p.slope_low), Comparison::Within));
    report.records.push_back(make_record("max_error_over_stderr", max_z, p.stderr_factor, 1.0, Comparison::AtMostScaled));
    report.details["by_n"] = std::move(table);
    report.wall_clock_seconds = clock.seconds();
    return report;
}

ExperimentReport run_concentration(const GaussianMixture& target, const ConcentrationParams& p, const RunContext& ctx)
{
    const Stopwatch clock;
    if (p.n_list.size() < 2) throw DomainError("concentration: n_list needs at least two sizes");
    if (p.repeats < 2) throw DomainError("concentration: repeats must be >= 2");
    if (p.n_proj < 1) throw DomainError("concentration: n_proj must be >= 1");
    if (!(p.eps > 0.0 && p.eps < 1.0)) throw DomainError("concentration: eps must lie in (0, 1)");
    const Eigen::Index largest = *std::max_element(p.n_list.begin(), p.n_list.end());
    if (*std::min_element(p.n_list.begin(), p.n_list.end()) < 1) throw DomainError("concentration: sizes must be >= 1");
    if (p.reference_n < 10 * largest) throw DomainError("concentration: reference_n must be at least 10x the largest n");

    ExperimentReport report = start_report(target, p, GridSpec{}, ctx);
    const Eigen::Index d = target.dim();
    const SampleSet reference = target_samples(target, p.reference_n, stage_seed(ctx.seed, 0), ctx.threads);
    Rng dir_rng(stage_seed(ctx.seed, 1));
    const SlicedReference ref(reference, random_directions(d, p.n_proj, dir_rng));

    const std::size_t nn = p.n_list.size();
    const auto reps = static_cast<std::size_t>(p.repeats);
    std::vector<double> dist(nn * reps);
    const std::uint64_t base = stage_seed(ctx.seed, 2);
    parallel_for(nn * reps, ctx.threads, [&](std::size_t task) {
        const SampleSet sample = target_samples(target, p.n_list[task / reps], mix64(base ^ mix64(task)), 1);
        dist[task] = ref.distance(sample).value;
    });

    const ConvexityProfile profile = target.profile();
    const double C = functional_constants(profile).T2_C;
    std::vector<double> ns, means, rates;
    Json table = Json::array();
    for (std::size_t in = 0; in < nn; ++in) {
        const std::vector<double> row(dist.begin() + static_cast<std::ptrdiff_t>(in * reps),
                                      dist.begin() + static_cast<std::ptrdiff_t>((in + 1) * reps));
        const double n = static_cast<double>(p.n_list[in]);
        const double mean = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(reps);
        const double median = quantile(row, 0.5);
        const double upper = quantile(row, 1.0 - p.eps);
        const ConcentrationBound bound =
            concentration_bound(profile, static_cast<int>(d), p.n_list[in], p.eps, 0.0, 1.0);
        ns.push_back(n);
        means.push_back(mean);
        rates.push_back(empirical_rate(static_cast<int>(d), n));
        report.records.push_back(make_record(label("deviation_above_median_n=", n), upper - median,
                                             bound.deviation_term, 1.0, Comparison::AtMostScaled));
        table.push_back({{"n", p.n_list[in]},
                         {"mean", mean},
                         {"median", median},
                         {"upper_quantile", upper},
                         {"deviation_term", bound.deviation_term},
                         {"deviation_term_constant_in_denominator", bound.deviation_term_constant_in_denominator}});
    }
    const double slope = log_log_slope(ns, means);
    const double expected = log_log_slope(ns, rates);
    report.records.insert(report.records.begin(),
                          make_record("decay_slope", slope, expected, p.slope_tolerance, Comparison::Within));
    report.details["transport_constant"] = C;
    report.details["by_n"] = std::move(table);
    report.wall_clock_seconds = clock.seconds();
    return report;
}

ExperimentReport run_time_change(const GaussianMixture& target, const TimeChangeParams& p, const RunContext& ctx)
{
    const Stopwatch clock;
    if (!(p.s_max > 0.0) || !std::isfinite(p.s_max)) throw DomainError("time_change: s_max must be positive");
    if (p.n_points < 1) throw DomainError("time_change: n_points must be >= 1");
    if (p.refinement_levels < 1) throw DomainError("time_change: refinement_levels must be >= 1");
    if (p.resolution < (1 << p.refinement_levels)) throw DomainError("time_change: resolution too small to halve");

    ExperimentReport report = start_report(target, p, GridSpec{}, ctx);
    const SampleSet starts = target_samples(target, p.n_points, stage_seed(ctx.seed, 0), 1);
    const VelocityField v = exact_velocity_field(target);

    // Finest first: resolution, resolution / 2, ...
    std::vector<int> levels;
    for (int l = 0; l <= p.refinement_levels; ++l) levels.push_back(p.resolution >> l);
    std::vector<double> deviation(levels.size() * static_cast<std::size_t>(p.n_points));
    parallel_for(deviation.size(), ctx.threads, [&](std::size_t task) {
        const int steps = levels[task / static_cast<std::size_t>(p.n_points)];
        const auto row = static_cast<Eigen::Index>(task % static_cast<std::size_t>(p.n_points));
        std::vector<double> s(static_cast<std::size_t>(steps) + 1);
        for (int k = 0; k <= steps; ++k) s[static_cast<std::size_t>(k)] = p.s_max * k / steps;
        deviation[task] = time_change_check(v, starts.points.row(row).transpose(), s);
    });

    std::vector<double> worst(levels.size(), 0.0);
    for (std::size_t task = 0; task < deviation.size(); ++task) {
        auto& w = worst[task / static_cast<std::size_t>(p.n_points)];
        w = std::max(w, deviation[task]);
    }

    report.records.push_back(make_record("deviation_at_resolution", worst[0], p.threshold, 1.0,
                                         Comparison::AtMostScaled));
    Json table = Json::array();
    for (std::size_t l = 0; l < levels.size(); ++l) table.push_back({{"steps", levels[l]}, {"deviation", worst[l]}});
    for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
        // Once the finer deviation reaches round-off the ratio carries no information;
        // the floor then stands in for it so a still-large coarse deviation keeps passing.
        const double fine = std::max(worst[l], p.roundoff_floor);
        const double ratio = worst[l + 1] / fine;
        report.records.push_back(make_record("refinement_ratio_steps=" + std::to_string(levels[l + 1]) + "->" +
                                                 std::to_string(levels[l]),
                                             ratio, p.refinement_ratio, 1.0, Comparison::AtLeast));
    }
    report.details["by_steps"] = std::move(table);
    report.wall_clock_seconds = clock.seconds();
    return report;
}

ExperimentReport run_reverse_sde(const GaussianMixture& target, const ReverseSdeParams& p, const RunContext& ctx)
{
    const Stopwatch clock;
    if (!(p.eps > 0.0 && p.eps < 1.0)) throw DomainError("reverse_sde: eps must lie in (0, 1)");
    if (!(p.t > 0.0 && p.t <= 1.0 - p.eps)) throw DomainError("reverse_sde: t must lie in (0, 1 - eps]");
    if (p.steps < 1) throw DomainError("reverse_sde: steps must be >= 1");
    if (p.n < 2) throw DomainError("reverse_sde: n must be >= 2");

    ExperimentReport report = start_report(target, p, GridSpec{}, ctx);
    // Uniform in s = -log(1 - t) on [0, -log(1 - p.t)], ending exactly at p.t.
    const double s_end = -std::log1p(-p.t);
    std::vector<double> nodes(static_cast<std::size_t>(p.steps) + 1);
    for (int k = 0; k <= p.steps; ++k) nodes[static_cast<std::size_t>(k)] = -std::expm1(-s_end * k / p.steps);
    nodes.back() = p.t;
    const TimeGrid grid = TimeGrid::custom(std::move(nodes));

    const auto paths = reverse_sde_simulate(target, grid, p.eps, p.n, {stage_seed(ctx.seed, 0), ctx.threads});
    const double a = 1.0 - p.t;
    const double b = std::sqrt(p.t * (2.0 - p.t));
    const SampleSet direct_a = interpolated_samples(target, a, b, p.n, stage_seed(ctx.seed, 1), ctx.threads);
    const SampleSet direct_b = interpolated_samples(target, a, b, p.n, stage_seed(ctx.seed, 2), ctx.threads);
    Rng dir_rng(stage_seed(ctx.seed, 3));
    const Matrix directions = random_directions(target.dim(), p.n_proj, dir_rng);
    const SlicedEstimate dist = sliced_w2(paths.back(), direct_a, directions, ctx.threads);
    const SlicedEstimate floor = sliced_w2(direct_a, direct_b, directions, ctx.threads);

    report.records.push_back(make_record(label("reverse_sde_sliced_w2_t=", p.t), dist.value, floor.value,
                                         p.floor_factor, Comparison::AtMostScaled));
    report.details["sliced_w2_stderr"] = dist.stderr_;
    report.details["floor_stderr"] = floor.stderr_;
    report.wall_clock_seconds = clock.seconds();
    return report;
}

ExperimentReport run_functional(const GaussianMixture& target, const FunctionalParams& p, const RunContext& ctx)
{
    const Stopwatch clock;
    if (p.n < 2) throw DomainError("functional: n must be >= 2");
    if (p.bootstrap < 2) throw DomainError("functional: bootstrap must be >= 2");

    ExperimentReport report = start_report(target, p, GridSpec{}, ctx);
    const SampleSet samples = target_samples(target, p.n, stage_seed(ctx.seed, 0), ctx.threads);
    Rng family_rng(stage_seed(ctx.seed, 1));
    const auto poincare_family = default_poincare_family(target.dim(), family_rng);
    const auto ls_family = default_log_sobolev_family(target.dim(), family_rng);
    const ConstantsReport constants = functional_constants(target.profile());

    const FunctionalEstimate cp = empirical_poincare(samples, poincare_family, p.bootstrap, stage_seed(ctx.seed, 2));
    const FunctionalEstimate cls = empirical_log_sobolev(samples, ls_family, p.bootstrap, stage_seed(ctx.seed, 3));
    report.records.push_back(make_record("empirical_poincare", cp.value, constants.C_P,
                                         p.stderr_factor * cp.bootstrap_stderr, Comparison::AtMostPlus));
    report.records.push_back(make_record("empirical_log_sobolev", cls.value, constants.C_LS,
                                         p.stderr_factor * cls.bootstrap_stderr, Comparison::AtMostPlus));
    report.details["poincare_best_function"] = cp.best_function;
    report.details["poincare_bootstrap_stderr"] = cp.bootstrap_stderr;
    report.details["log_sobolev_best_function"] = cls.best_function;
    report.details["log_sobolev_bootstrap_stderr"] = cls.bootstrap_stderr;
    report.wall_clock_seconds = clock.seconds();
    return report;
}

ExperimentReport run_experiment(const GaussianMixture& target, const ExperimentParams& params, const GridSpec& grid,
                                const RunContext& ctx)
{
    struct Visitor {
        const GaussianMixture& target;
        const GridSpec& grid;
        const RunContext& ctx;
        ExperimentReport operator()(const MarginalParams& p) const { return run_marginal_check(target, p, grid, ctx); }
        ExperimentReport operator()(const LipschitzParams& p) const { return run_lipschitz_check(target, p, grid, ctx); }
        ExperimentReport operator()(const EstimatorParams& p) const { return run_estimator_consistency(target, p, ctx); }
        ExperimentReport operator()(const ConcentrationParams& p) const { return run_concentration(target, p, ctx); }
        ExperimentReport operator()(const TimeChangeParams& p) const { return run_time_change(target, p, ctx); }
        ExperimentReport operator()(const ReverseSdeParams& p) const { return run_reverse_sde(target, p, ctx); }
        ExperimentReport operator()(const FunctionalParams& p) const { return run_functional(target, p, ctx); }
    };
    return std::visit(Visitor{target, grid, ctx}, params);
}

} // namespace follmer
