#include "follmer/config.hpp"

#include "follmer/presets.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace follmer {

namespace {

// Reads an object strictly: every key that finish() finds unrequested is an error.
class Reader {
public:
    Reader(const Json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    const Json* find(const std::string& key)
    {
        known_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    bool has(const std::string& key) { return find(key) != nullptr; }

    double number(const std::string& key, double fallback)
    {
        const Json* v = find(key);
        return v ? as_number(*v, where(key)) : fallback;
    }

    double extended(const std::string& key, double fallback)
    {
        const Json* v = find(key);
        if (!v) return fallback;
        if (v->is_string()) {
            const auto s = v->get<std::string>();
            if (s == "inf" || s == "+inf") return kInf;
            if (s == "-inf") return -kInf;
            throw ConfigError(where(key) + ": expected a number, \"inf\" or \"-inf\"");
        }
        return as_number(*v, where(key));
    }

    long long integer(const std::string& key, long long fallback, long long min_value)
    {
        const Json* v = find(key);
        if (!v) return fallback;
        return as_integer(*v, where(key), min_value);
    }

    std::uint64_t unsigned64(const std::string& key)
    {
        const Json* v = find(key);
        if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
            throw ConfigError(where(key) + ": expected an unsigned 64-bit integer");
        }
        return v->get<std::uint64_t>();
    }

    std::string string(const std::string& key, const std::string& fallback)
    {
        const Json* v = find(key);
        if (!v) return fallback;
        if (!v->is_string()) throw ConfigError(where(key) + ": expected a string");
        return v->get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> fallback)
    {
        const Json* v = find(key);
        if (!v) return fallback;
        if (!v->is_array() || v->empty()) throw ConfigError(where(key) + ": expected a nonempty array of numbers");
        std::vector<double> out;
        for (const auto& e : *v) out.push_back(as_number(e, where(key)));
        return out;
    }

    std::vector<long long> integers(const std::string& key, const std::vector<long long>& fallback, long long min_value)
    {
        const Json* v = find(key);
        if (!v) return fallback;
        if (!v->is_array() || v->empty()) throw ConfigError(where(key) + ": expected a nonempty array of integers");
        std::vector<long long> out;
        for (const auto& e : *v) out.push_back(as_integer(e, where(key), min_value));
        return out;
    }

    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const
    {
        for (const auto& [key, _] : j_.items()) {
            if (!known_.count(key)) throw ConfigError(where(key) + ": unknown key");
        }
    }

    static double as_number(const Json& v, const std::string& where)
    {
        if (!v.is_number()) throw ConfigError(where + ": expected a number");
        return v.get<double>();
    }

    static long long as_integer(const Json& v, const std::string& where, long long min_value)
    {
        if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
        if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<long long>::max())) {
            throw ConfigError(where + ": integer out of range");
        }
        const auto x = v.get<long long>();
        if (x < min_value) throw ConfigError(where + ": must be >= " + std::to_string(min_value));
        return x;
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> known_;
};

int to_int(long long v, const std::string& where)
{
    if (v > std::numeric_limits<int>::max()) throw ConfigError(where + ": integer out of range");
    return static_cast<int>(v);
}

void require_positive(double v, const std::string& where)
{
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(where + ": must be positive and finite");
}

GridSpec parse_grid(const Json& j)
{
    Reader r(j, "grid");
    GridSpec g;
    g.steps = to_int(r.integer("steps", g.steps, 1), "grid.steps");
    g.scheme = parse_grid_scheme(r.string("scheme", to_string(g.scheme)));
    if (g.scheme == GridScheme::Custom) throw ConfigError("grid.scheme: custom grids cannot be configured");
    g.method = parse_method(r.string("method", to_string(g.method)));
    g.eps_endpoint = r.number("eps_endpoint", g.eps_endpoint);
    if (!(g.eps_endpoint >= 0.0 && g.eps_endpoint < 1.0)) throw ConfigError("grid.eps_endpoint: must lie in [0, 1)");
    r.finish();
    return g;
}

TargetSpec parse_target(const Json& j, const std::filesystem::path& base_dir)
{
    Reader r(j, "target");
    const bool preset = r.has("preset");
    const bool file = r.has("mixture_file");
    const bool inline_mixture = r.has("mixture");
    if (preset + file + inline_mixture != 1) {
        throw ConfigError("target: exactly one of preset, mixture_file, mixture is required");
    }
    TargetSpec out;
    if (preset) {
        PresetTarget p{r.string("preset", ""), std::nullopt};
        if (r.has("dim")) p.dim = to_int(r.integer("dim", 1, 1), "target.dim");
        resolve_target(p);  // rejects unknown names and bad dimensions early
        out = p;
    } else if (file) {
        std::filesystem::path path = r.string("mixture_file", "");
        if (path.is_relative()) path = base_dir / path;
        out = mixture_from_json(parse_json_file(path));
    } else {
        out = mixture_from_json(*r.find("mixture"));
    }
    r.finish();
    return out;
}

} // namespace

GaussianMixture resolve_target(const TargetSpec& spec)
{
    if (const auto* p = std::get_if<PresetTarget>(&spec)) return preset(p->name, p->dim);
    return std::get<GaussianMixture>(spec);
}

Json target_spec_to_json(const TargetSpec& spec)
{
    if (const auto* p = std::get_if<PresetTarget>(&spec)) {
        Json out = {{"preset", p->name}};
        if (p->dim) out["dim"] = *p->dim;
        return out;
    }
    return {{"mixture", mixture_to_json(std::get<GaussianMixture>(spec))}};
}

Json parse_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

Json grid_to_json(const GridSpec& g)
{
    return {{"steps", g.steps},
            {"scheme", to_string(g.scheme)},
            {"method", to_string(g.method)},
            {"eps_endpoint", g.eps_endpoint}};
}

Json experiment_params_to_json(const ExperimentParams& params)
{
    Json out = {{"kind", experiment_kind(params)}};
    std::visit(
        [&out](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, MarginalParams>) {
                out["t_list"] = p.t_list;
                out["n"] = p.n;
                out["n_proj"] = p.n_proj;
                out["floor_factor"] = p.floor_factor;
            } else if constexpr (std::is_same_v<T, LipschitzParams>) {
                out["n_points"] = p.n_points;
                out["tolerance"] = p.tolerance;
                out["envelope_slack"] = p.envelope_slack;
            } else if constexpr (std::is_same_v<T, EstimatorParams>) {
                out["t_list"] = p.t_list;
                out["x_list"] = p.x_list;
                out["n_list"] = p.n_list;
                out["repeats"] = p.repeats;
                out["slope_low"] = p.slope_low;
                out["slope_high"] = p.slope_high;
                out["stderr_factor"] = p.stderr_factor;
            } else if constexpr (std::is_same_v<T, ConcentrationParams>) {
                out["n_list"] = p.n_list;
                out["repeats"] = p.repeats;
                out["reference_n"] = p.reference_n;
                out["n_proj"] = p.n_proj;
                out["eps"] = p.eps;
                out["slope_tolerance"] = p.slope_tolerance;
            } else if constexpr (std::is_same_v<T, TimeChangeParams>) {
                out["s_max"] = p.s_max;
                out["resolution"] = p.resolution;
                out["n_points"] = p.n_points;
                out["threshold"] = p.threshold;
                out["refinement_levels"] = p.refinement_levels;
                out["refinement_ratio"] = p.refinement_ratio;
                out["roundoff_floor"] = p.roundoff_floor;
            } else if constexpr (std::is_same_v<T, ReverseSdeParams>) {
                out["t"] = p.t;
                out["n"] = p.n;
                out["steps"] = p.steps;
                out["eps"] = p.eps;
                out["n_proj"] = p.n_proj;
                out["floor_factor"] = p.floor_factor;
            } else {
                static_assert(std::is_same_v<T, FunctionalParams>);
                out["n"] = p.n;
                out["bootstrap"] = p.bootstrap;
                out["stderr_factor"] = p.stderr_factor;
            }
        },
        params);
    return out;
}

ExperimentParams experiment_params_from_json(const Json& j)
{
    Reader r(j, "experiment");
    const std::string kind = r.string("kind", "");
    auto positive = [&r](const std::string& key, double fallback) {
        const double v = r.number(key, fallback);
        require_positive(v, r.where(key));
        return v;
    };
    ExperimentParams out;
    if (kind == "marginal") {
        MarginalParams p;
        p.t_list = r.numbers("t_list", p.t_list);
        for (double t : p.t_list) {
            if (!(t > 0.0 && t <= 1.0)) throw ConfigError("experiment.t_list: times must lie in (0, 1]");
        }
        p.n = r.integer("n", p.n, 2);
        p.n_proj = to_int(r.integer("n_proj", p.n_proj, 1), "experiment.n_proj");
        p.floor_factor = positive("floor_factor", p.floor_factor);
        out = p;
    } else if (kind == "lipschitz") {
        LipschitzParams p;
        p.n_points = r.integer("n_points", p.n_points, 2);
        p.tolerance = positive("tolerance", p.tolerance);
        p.envelope_slack = r.number("envelope_slack", p.envelope_slack);
        if (!(p.envelope_slack >= 0.0)) throw ConfigError("experiment.envelope_slack: must be >= 0");
        out = p;
    } else if (kind == "estimator") {
        EstimatorParams p;
        p.t_list = r.numbers("t_list", p.t_list);
        for (double t : p.t_list) {
            if (!(t > 0.0 && t < 1.0)) throw ConfigError("experiment.t_list: times must lie in (0, 1)");
        }
        p.x_list = r.numbers("x_list", p.x_list);
        const auto ns = r.integers("n_list", {p.n_list.begin(), p.n_list.end()}, 2);
        if (ns.size() < 2) throw ConfigError("experiment.n_list: need at least two sizes");
        p.n_list.assign(ns.begin(), ns.end());
        p.repeats = to_int(r.integer("repeats", p.repeats, 1), "experiment.repeats");
        p.slope_low = r.number("slope_low", p.slope_low);
        p.slope_high = r.number("slope_high", p.slope_high);
        if (!(p.slope_low < p.slope_high)) throw ConfigError("experiment: slope_low must be below slope_high");
        p.stderr_factor = positive("stderr_factor", p.stderr_factor);
        out = p;
    } else if (kind == "concentration") {
        ConcentrationParams p;
        const auto ns = r.integers("n_list", {p.n_list.begin(), p.n_list.end()}, 1);
        if (ns.size() < 2) throw ConfigError("experiment.n_list: need at least two sizes");
        p.n_list.assign(ns.begin(), ns.end());
        p.repeats = to_int(r.integer("repeats", p.repeats, 2), "experiment.repeats");
        p.reference_n = r.integer("reference_n", p.reference_n, 1);
        p.n_proj = to_int(r.integer("n_proj", p.n_proj, 1), "experiment.n_proj");
        p.eps = r.number("eps", p.eps);
        if (!(p.eps > 0.0 && p.eps < 1.0)) throw ConfigError("experiment.eps: must lie in (0, 1)");
        p.slope_tolerance = positive("slope_tolerance", p.slope_tolerance);
        const Eigen::Index largest = *std::max_element(p.n_list.begin(), p.n_list.end());
        if (p.reference_n < 10 * largest) throw ConfigError("experiment.reference_n: must be at least 10x the largest n");
        out = p;
    } else if (kind == "time_change") {
        TimeChangeParams p;
        p.s_max = positive("s_max", p.s_max);
        p.resolution = to_int(r.integer("resolution", p.resolution, 2), "experiment.resolution");
        p.n_points = r.integer("n_points", p.n_points, 1);
        p.threshold = positive("threshold", p.threshold);
        p.refinement_levels = to_int(r.integer("refinement_levels", p.refinement_levels, 1), "experiment.refinement_levels");
        if (p.refinement_levels > 20 || p.resolution < (1 << p.refinement_levels)) {
            throw ConfigError("experiment.resolution: too small for the requested refinement levels");
        }
        p.refinement_ratio = positive("refinement_ratio", p.refinement_ratio);
        p.roundoff_floor = positive("roundoff_floor", p.roundoff_floor);
        out = p;
    } else if (kind == "reverse_sde") {
        ReverseSdeParams p;
        p.t = r.number("t", p.t);
        p.n = r.integer("n", p.n, 2);
        p.steps = to_int(r.integer("steps", p.steps, 1), "experiment.steps");
        p.eps = r.number("eps", p.eps);
        if (!(p.eps > 0.0 && p.eps < 1.0)) throw ConfigError("experiment.eps: must lie in (0, 1)");
        if (!(p.t > 0.0 && p.t <= 1.0 - p.eps)) throw ConfigError("experiment.t: must lie in (0, 1 - eps]");
        p.n_proj = to_int(r.integer("n_proj", p.n_proj, 1), "experiment.n_proj");
        p.floor_factor = positive("floor_factor", p.floor_factor);
        out = p;
    } else if (kind == "functional") {
        FunctionalParams p;
        p.n = r.integer("n", p.n, 2);
        p.bootstrap = to_int(r.integer("bootstrap", p.bootstrap, 2), "experiment.bootstrap");
        p.stderr_factor = positive("stderr_factor", p.stderr_factor);
        out = p;
    } else {
        throw ConfigError("experiment.kind: unknown kind '" + kind +
                          "' (expected marginal, lipschitz, estimator, concentration, time_change, reverse_sde "
                          "or functional)");
    }
    r.finish();
    return out;
}

RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir)
{
    Reader r(j, "");
    RunConfig cfg;
    try {
        if (const Json* t = r.find("target")) cfg.target = parse_target(*t, base_dir);
        if (const Json* g = r.find("grid")) cfg.grid = parse_grid(*g);
        if (const Json* e = r.find("experiment")) cfg.experiment = experiment_params_from_json(*e);
        if (r.has("seed")) cfg.seed = r.unsigned64("seed");
        cfg.n = r.integer("n", cfg.n, 1);
        if (const Json* o = r.find("output")) {
            Reader out(*o, "output");
            if (out.has("path")) cfg.output.path = out.string("path", "");
            cfg.output.format = parse_output_format(out.string("format", "json"));
            out.finish();
        }
        r.finish();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    return parse_run_config(parse_json_file(path), path.parent_path());
}

Json snapshot_config(const TargetSpec& target, const ExperimentParams& params, const GridSpec& grid,
                     std::uint64_t seed)
{
    Json out;
    out["target"] = target_spec_to_json(target);
    if (std::holds_alternative<MarginalParams>(params) || std::holds_alternative<LipschitzParams>(params)) {
        out["grid"] = grid_to_json(grid);
    }
    out["experiment"] = experiment_params_to_json(params);
    out["seed"] = seed;
    return out;
}

ExperimentReport run_config(const RunConfig& cfg, unsigned threads)
{
    if (!cfg.seed) throw ConfigError("seed: required (set it in the config or pass --seed)");
    if (!cfg.experiment) throw ConfigError("experiment: required for this command");
    const GaussianMixture target = resolve_target(cfg.target);
    ExperimentReport report = run_experiment(target, *cfg.experiment, cfg.grid, {*cfg.seed, threads});
    report.config = snapshot_config(cfg.target, *cfg.experiment, cfg.grid, *cfg.seed);
    return report;
}

BoundsInput parse_bounds_input(const Json& j)
{
    if (!j.is_object()) throw ConfigError("bounds input: expected an object");
    BoundsInput in;
    Reader r(j, "");
    try {
        if (j.contains("weights") || j.contains("centers")) {
            Json mixture = Json::object();
            for (const char* key : {"dim", "sigma", "weights", "centers"}) {
                if (const Json* v = r.find(key)) mixture[key] = *v;
            }
            in.profile = convexity_profile(mixture_from_json(mixture));
        } else {
            in.profile.kappa = r.extended("kappa", -kInf);
            in.profile.beta = r.extended("beta", kInf);
            in.profile.D = r.extended("D", kInf);
            if (const Json* m = r.find("mixture")) {
                Reader mr(*m, "mixture");
                in.profile.mixture = MixtureParams{mr.number("sigma", 1.0), mr.number("R", 0.0)};
                mr.finish();
            }
        }
        if (r.has("q")) {
            in.q.clear();
            for (long long q : r.integers("q", {}, 2)) {
                check_even_q(to_int(q, "q"));
                in.q.push_back(static_cast<int>(q));
            }
        }
        if (const Json* a = r.find("affine")) {
            Reader ar(*a, "affine");
            AffineConstants c;
            c.lambda_min = ar.number("lambda_min", c.lambda_min);
            c.lambda_max = ar.number("lambda_max", c.lambda_max);
            c.R = ar.number("R", c.R);
            ar.finish();
            in.affine = c;
        }
        if (const Json* c = r.find("concentration")) {
            Reader cr(*c, "concentration");
            BoundsInput::Concentration conc;
            conc.d = to_int(cr.integer("d", conc.d, 1), "concentration.d");
            conc.n = cr.integer("n", conc.n, 1);
            conc.eps = cr.number("eps", conc.eps);
            conc.fifth_moment = cr.number("fifth_moment", conc.fifth_moment);
            conc.c_d = cr.number("c_d", conc.c_d);
            cr.finish();
            in.concentration = conc;
        }
        r.finish();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return in;
}

Json bounds_report(const BoundsInput& in)
{
    const ConstantsReport c = functional_constants(in.profile, in.affine);
    Json out;
    out["case"] = to_string(c.case_tag);
    out["t0"] = c.t0 ? Json(*c.t0) : Json(nullptr);
    out["lipschitz"] = c.lipschitz;
    out["C_P"] = c.C_P;
    out["C_LS"] = c.C_LS;
    out["psi_sobolev_half"] = c.psi_sobolev_half;
    out["isoperimetric_C"] = c.isoperimetric_C;
    out["T2_C"] = c.T2_C;
    Json q = Json::object();
    for (int k : in.q) q[std::to_string(k)] = c.q_poincare(k);
    out["q_poincare"] = std::move(q);
    if (c.affine_case) {
        const AffineConstants& a = *c.affine_case;
        Json aq = Json::object();
        for (int k : in.q) aq[std::to_string(k)] = a.q_poincare(k);
        out["affine_case"] = {{"lambda_min", a.lambda_min},
                              {"lambda_max", a.lambda_max},
                              {"R", a.R},
                              {"psi_sobolev_half", a.psi_sobolev_half()},
                              {"C_P", a.C_P()},
                              {"C_LS", a.C_LS()},
                              {"isoperimetric_C", a.isoperimetric_C()},
                              {"q_poincare", std::move(aq)}};
    }
    if (in.concentration) {
        const auto& k = *in.concentration;
        const ConcentrationBound b = concentration_bound(in.profile, k.d, k.n, k.eps, k.fifth_moment, k.c_d);
        out["concentration"] = {{"d", k.d},
                                {"n", k.n},
                                {"eps", k.eps},
                                {"deviation_term", b.deviation_term},
                                {"mean_term", b.mean_term},
                                {"total", b.total},
                                {"deviation_term_constant_in_denominator", b.deviation_term_constant_in_denominator}};
    }
    return out;
}

} // namespace follmer
