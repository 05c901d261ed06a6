// follmer: command-line front end.
//
//   follmer sample        --config run.json [--seed N] [--out path] [--format csv|json] [--threads N]
//                         [--trajectories path] [--trajectory-count N]
//   follmer bounds        <profile.json> [--out path]
//   follmer verify        --config run.json [--seed N] [--out path] [--format csv|json] [--threads N]
//   follmer concentration --config run.json [...same flags as verify]
//
// Exit codes: 0 success, 1 a check failed (report still written), 2 bad
// configuration or input, 3 numerical failure.

#include "follmer/config.hpp"
#include "follmer/flow.hpp"
#include "follmer/io.hpp"
#include "follmer/velocity.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

using namespace follmer;

namespace {

enum ExitCode { kOk = 0, kCheckFailed = 1, kConfigError = 2, kNumericalError = 3 };

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format;
    unsigned threads = 1;
};

void add_common(CLI::App* cmd, CommonFlags& f)
{
    cmd->add_option("--config", f.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "Master seed; overrides the config");
    cmd->add_option("--out", f.out, "Output path; overrides the config (default: stdout)");
    cmd->add_option("--format", f.format, "Output format; overrides the config")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
}

RunConfig load(const CommonFlags& f)
{
    RunConfig cfg = load_run_config(f.config);
    if (f.seed) cfg.seed = *f.seed;
    if (!f.out.empty()) cfg.output.path = f.out;
    if (!f.format.empty()) cfg.output.format = parse_output_format(f.format);
    return cfg;
}

// Writes through a temporary file so that a failed run never leaves a partial output.
void emit(const std::optional<std::string>& path, const std::function<void(std::ostream&)>& write)
{
    if (!path) {
        write(std::cout);
        std::cout.flush();
        return;
    }
    const std::filesystem::path target(*path);
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw ConfigError("cannot write '" + tmp.string() + "'");
        write(os);
        if (!os) throw ConfigError("write to '" + tmp.string() + "' failed");
    }
    std::filesystem::rename(tmp, target);
}

int cmd_sample(const CommonFlags& f, const std::string& traj_path, int traj_count)
{
    const RunConfig cfg = load(f);
    if (!cfg.seed) throw ConfigError("seed: required (set it in the config or pass --seed)");
    const GaussianMixture target = resolve_target(cfg.target);
    const TimeGrid grid = cfg.grid.make();
    const VelocityField v = exact_velocity_field(target);
    const SampleSet samples = push_forward_samples(v, target.dim(), cfg.n, grid, cfg.grid.method, {*cfg.seed, f.threads});

    std::vector<Trajectory> trajectories;
    if (!traj_path.empty()) {
        const Eigen::Index count = std::min<Eigen::Index>(traj_count, cfg.n);
        const SampleSet inputs = gaussian_inputs(target.dim(), count, *cfg.seed);
        const JacobianField jac = exact_jacobian_field(target);
        for (Eigen::Index i = 0; i < count; ++i) {
            trajectories.push_back(jacobian_along_flow(v, jac, inputs.points.row(i).transpose(), grid, cfg.grid.method));
        }
    }

    const SampleHeader header{*cfg.seed, grid.steps(), to_string(cfg.grid.method), to_string(cfg.grid.scheme),
                              target_hash(target)};
    emit(cfg.output.path, [&](std::ostream& os) { write_samples(os, samples, header, cfg.output.format); });
    if (!traj_path.empty()) {
        std::vector<TrajectoryRecord> records;
        for (std::size_t i = 0; i < trajectories.size(); ++i) records.push_back({i, &trajectories[i]});
        emit(traj_path, [&](std::ostream& os) { write_trajectories(os, *cfg.seed, records, cfg.output.format); });
    }
    return kOk;
}

int cmd_bounds(const std::string& profile_path, const std::string& out)
{
    const BoundsInput input = parse_bounds_input(parse_json_file(profile_path));
    const Json report = bounds_report(input);
    emit(out.empty() ? std::nullopt : std::optional<std::string>(out),
         [&](std::ostream& os) { os << report.dump(2) << '\n'; });
    return kOk;
}

int cmd_verify(const CommonFlags& f, bool concentration_only)
{
    RunConfig cfg = load(f);
    if (concentration_only) {
        if (!cfg.experiment) cfg.experiment = ConcentrationParams{};
        if (!std::holds_alternative<ConcentrationParams>(*cfg.experiment)) {
            throw ConfigError("experiment.kind: the concentration command needs kind 'concentration'");
        }
    }
    const ExperimentReport report = run_config(cfg, f.threads);
    emit(cfg.output.path, [&](std::ostream& os) {
        if (cfg.output.format == OutputFormat::Csv) {
            os << report.records_csv();
        } else {
            os << report.to_json().dump(2) << '\n';
        }
    });
    for (const auto& r : report.records) {
        if (!r.pass) std::cerr << "FAIL " << r.name << ": " << format_double(r.estimate) << " vs " << to_string(r.comparison)
                               << " (bound_or_target " << format_double(r.bound_or_target) << ", tolerance "
                               << format_double(r.tolerance) << ")\n";
    }
    return report.passed() ? kOk : kCheckFailed;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sampling, bounds and verification runs for the Follmer flow of Gaussian-mixture targets"};
    app.require_subcommand(1);

    CommonFlags sample_flags, verify_flags, conc_flags;
    std::string traj_path;
    int traj_count = 16;
    auto* sample = app.add_subcommand("sample", "Push standard Gaussian draws through the flow and write the samples");
    add_common(sample, sample_flags);
    sample->add_option("--trajectories", traj_path, "Also dump per-node trajectories with Jacobian norms");
    sample->add_option("--trajectory-count", traj_count, "Number of particles in the trajectory dump")
        ->check(CLI::PositiveNumber);

    std::string profile_path, bounds_out;
    auto* bounds = app.add_subcommand("bounds", "Print the constants implied by a convexity profile as JSON");
    bounds->add_option("profile", profile_path, "Profile or mixture file (JSON)")->required()->check(CLI::ExistingFile);
    bounds->add_option("--out", bounds_out, "Output path (default: stdout)");

    auto* verify = app.add_subcommand("verify", "Run the configured experiment and write its report");
    add_common(verify, verify_flags);

    auto* conc = app.add_subcommand("concentration", "Run the empirical-measure concentration experiment");
    add_common(conc, conc_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*sample) return cmd_sample(sample_flags, traj_path, traj_count);
        if (*bounds) return cmd_bounds(profile_path, bounds_out);
        if (*verify) return cmd_verify(verify_flags, false);
        if (*conc) return cmd_verify(conc_flags, true);
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}
