// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance [criterion numbers...]   (default: all)

#include "follmer/bounds.hpp"
#include "follmer/config.hpp"
#include "follmer/flow.hpp"
#include "follmer/metrics.hpp"
#include "follmer/presets.hpp"
#include "follmer/velocity.hpp"

#include "oracles.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;
using namespace follmer;

namespace {

const fs::path kConfigs = FOLLMER_CONFIG_DIR;
const std::string kCli = FOLLMER_CLI_PATH;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!detail.empty()) detail += "; ";
        detail += what;
        pass = pass && ok;
    }
};

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

Vector point(std::initializer_list<double> xs)
{
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

ExperimentReport run_named(const std::string& config, unsigned threads = 1)
{
    return run_config(load_run_config(kConfigs / config), threads);
}

// Appends every record of a report; the outcome fails if any record fails.
void require_report(Outcome& o, const std::string& label, const ExperimentReport& r)
{
    for (const auto& rec : r.records) {
        o.require(rec.pass, label + " " + rec.name + "=" + fmt(rec.estimate) + " vs " + fmt(rec.bound_or_target) +
                                (rec.pass ? "" : " FAILED"));
    }
    if (r.records.empty()) o.require(false, label + " produced no records");
}

int run_shell(const std::string& cmd)
{
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------

Outcome identity_flow()
{
    Outcome o;
    double worst_v = 0.0, worst_x = 0.0, worst_j = 0.0;
    Rng rng(101);
    for (int d : {1, 2, 5}) {
        const GaussianMixture g = preset("std-gaussian", d);
        const VelocityField v = exact_velocity_field(g);
        for (int k = 0; k < 10; ++k) {
            const Vector x = 2.0 * standard_normal(rng, d);
            for (double t : {0.0, 0.3, 0.7, 1.0}) worst_v = std::max(worst_v, v(t, x).norm());
            for (Method m : {Method::Euler, Method::Rk4}) {
                const Trajectory tr = jacobian_along_flow(v, exact_jacobian_field(g), x, TimeGrid::uniform(100), m);
                worst_x = std::max(worst_x, (tr.final_state() - x).norm());
                worst_j = std::max(worst_j, (tr.jacobians.back() - Matrix::Identity(d, d)).cwiseAbs().maxCoeff());
            }
        }
    }
    o.require(worst_v < 1e-12, "max |V| = " + fmt(worst_v));
    o.require(worst_x < 1e-12, "max |X1(x) - x| = " + fmt(worst_x));
    o.require(worst_j < 1e-12, "max |grad X1 - I| = " + fmt(worst_j));
    return o;
}

Outcome gaussian_oracle()
{
    Outcome o;
    double worst_x = 0.0, worst_j = 0.0, worst_order = kInf;
    for (double beta : {0.25, 1.0, 4.0}) {
        const GaussianMixture g = gaussian_with_precision(beta, 1);
        const VelocityField v = exact_velocity_field(g);
        for (int i = -3; i <= 3; ++i) {
            const double x = i;
            const Trajectory tr = jacobian_along_flow(v, exact_jacobian_field(g), point({x}), TimeGrid::uniform(100), Method::Rk4);
            worst_x = std::max(worst_x, std::abs(tr.final_state()[0] - x / std::sqrt(beta)));
            worst_j = std::max(worst_j, std::abs(tr.op_norms.back() - 1.0 / std::sqrt(beta)));
        }
        if (beta == 1.0) continue;  // the flow is exact for any step count
        // Observed order from errors at 10, 20, 40 steps, x = 2.
        std::vector<double> err;
        for (int steps : {10, 20, 40}) {
            const double end = integrate(v, point({2.0}), TimeGrid::uniform(steps), Method::Rk4).final_state()[0];
            err.push_back(std::abs(end - oracle::gaussian_flow(beta, 1.0, 2.0)));
        }
        for (std::size_t k = 0; k + 1 < err.size(); ++k) worst_order = std::min(worst_order, std::log2(err[k] / err[k + 1]));
    }
    o.require(worst_x < 1e-6, "max |X1(x) - x/sqrt(beta)| = " + fmt(worst_x));
    o.require(worst_j < 1e-6, "max |opnorm - 1/sqrt(beta)| = " + fmt(worst_j));
    o.require(worst_order >= 3.5, "min observed RK4 order = " + fmt(worst_order));
    return o;
}

Outcome jacobian_formula()
{
    Outcome o;
    Rng rng(303);
    std::uniform_real_distribution<double> U(0.0, 0.98);
    double worst = 0.0;
    for (const char* name : {"mix-sym", "mix-asym", "mix-r1"}) {
        const GaussianMixture m = preset(name);
        const VelocityField v = exact_velocity_field(m);
        for (int k = 0; k < 100; ++k) {
            const double t = U(rng);
            const Vector x = 2.0 * standard_normal(rng, 2);
            const Matrix diff = jacobian_exact(m, t, x).matrix - jacobian_fd(v, t, x, 1e-4).matrix;
            worst = std::max(worst, diff.cwiseAbs().maxCoeff());
        }
    }
    o.require(worst < 1e-5, "max abs entry difference = " + fmt(worst) + " over 300 points");
    return o;
}

Outcome spectral_bounds()
{
    Outcome o;
    const GaussianMixture m = preset("mix-sym");
    const double s = m.sigma() * m.sigma() - 1.0;
    const double R2 = m.radius() * m.radius();
    double worst_gap = -kInf;
    for (int i = 0; i < 50; ++i) {
        const double t = i / 49.0;
        const double a = 1.0 + s * t * t;
        const double bound = t * (s * a + R2) / (a * a);
        for (int j = 0; j < 50; ++j) {
            const double u = -6.0 + 12.0 * j / 49.0;
            const Vector x = point({u, 0.25 * u});
            const double lmax = t < 1.0 ? jacobian_exact(m, t, x).lambda_max : jacobian_endpoint(m, x).lambda_max;
            worst_gap = std::max(worst_gap, lmax - bound);
        }
    }
    o.require(worst_gap <= 1e-8, "max(lambda_max - bound) = " + fmt(worst_gap));
    return o;
}

Outcome lipschitz_bound()
{
    Outcome o;
    require_report(o, "beta=4", run_named("lipschitz-gauss-beta4.json"));
    require_report(o, "mix-r1", run_named("lipschitz-mix-r1.json"));
    return o;
}

Outcome marginal_law()
{
    Outcome o;
    require_report(o, "d=1", run_named("marginal-mix-sym-d1.json"));
    require_report(o, "d=2", run_named("marginal-mix-sym.json"));
    return o;
}

Outcome estimator_consistency()
{
    Outcome o;
    require_report(o, "mix-sym", run_named("estimator-mix-sym.json"));
    return o;
}

Outcome time_change()
{
    Outcome o;
    require_report(o, "mix-sym", run_named("time-change-mix-sym.json"));
    return o;
}

Outcome reverse_sde()
{
    Outcome o;
    require_report(o, "mix-sym", run_named("reverse-sde-mix-sym.json"));
    return o;
}

Outcome constants()
{
    Outcome o;
    const fs::path dir = fs::temp_directory_path() / "follmer_acceptance";
    fs::create_directories(dir);
    auto bounds = [&](const std::string& text) {
        const fs::path in = dir / "profile.json";
        const fs::path out = dir / "bounds.json";
        std::ofstream(in) << text;
        fs::remove(out);
        if (run_shell(kCli + " bounds " + in.string() + " --out " + out.string() + " >/dev/null 2>&1") != 0) {
            return nlohmann::json();
        }
        return nlohmann::json::parse(slurp(out));
    };
    double worst = 0.0;
    auto rel = [&](double got, double want) { worst = std::max(worst, std::abs(got - want) / std::abs(want)); };

    for (double kappa : {0.5, 1.0, 4.0}) {
        const auto j = bounds(R"({"kappa": )" + fmt(kappa) + R"(, "q": [2, 4, 6]})");
        if (j.is_null()) return {false, "bounds failed for kappa=" + fmt(kappa)};
        const double L = oracle::exp_integral_log_concave(kappa);
        rel(j["lipschitz"].get<double>(), L);
        rel(j["lipschitz"].get<double>(), 1.0 / std::sqrt(kappa));
        for (int q : {2, 4, 6}) rel(j["q_poincare"][std::to_string(q)].get<double>(), std::pow((q - 1.0) / kappa, 0.5 * q));
    }
    for (auto [kappa, D] : {std::pair{0.0, 1.0}, {0.5, 1.0}, {-1.0, 0.8}, {0.1, 2.0}}) {
        const auto j = bounds(R"({"kappa": )" + fmt(kappa) + R"(, "D": )" + fmt(D) + "}");
        if (j.is_null()) return {false, "bounds failed for kappa=" + fmt(kappa) + ", D=" + fmt(D)};
        // Breakpoint located independently: the branches agree where, after clearing
        // denominators, (s + D^2 - 1)(s(1 - kappa) + kappa) = (1 - kappa)(1 - s)^2 with s = t^2.
        auto gap = [&](double s) { return (s + D * D - 1.0) * (s * (1.0 - kappa) + kappa) - (1.0 - kappa) * (1.0 - s) * (1.0 - s); };
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (gap(mid) < 0.0 ? lo : hi) = mid;
        }
        rel(j["t0"].get<double>(), std::sqrt(0.5 * (lo + hi)));
        rel(oracle::support_theta(D, j["t0"].get<double>()), oracle::log_concave_theta(kappa, j["t0"].get<double>()));
        rel(j["lipschitz"].get<double>(), oracle::exp_integral_support(kappa, D));
    }
    for (auto [sigma, R] : {std::pair{1.0, 1.0}, {0.8, 1.5}, {2.0, 0.5}}) {
        const auto j = bounds(R"({"mixture": {"sigma": )" + fmt(sigma) + R"(, "R": )" + fmt(R) + "}}");
        if (j.is_null()) return {false, "bounds failed for sigma=" + fmt(sigma)};
        const double L = oracle::exp_integral_mixture(sigma, R);
        rel(j["lipschitz"].get<double>(), L);
        rel(j["C_P"].get<double>(), L * L);
        rel(j["C_LS"].get<double>(), 2.0 * L * L);
    }
    o.require(worst < 1e-6, "max relative deviation from quadrature = " + fmt(worst) + " over 10 profiles");
    return o;
}

Outcome functional()
{
    Outcome o;
    require_report(o, "mix-sym", run_named("functional-mix-sym.json"));
    return o;
}

// The slope of one 20-repeat run is itself noisy, so the configured seed and
// four further seeds must each land inside the band.
Outcome concentration()
{
    Outcome o;
    for (const char* config : {"concentration-d2.json", "concentration-d6.json"}) {
        RunConfig cfg = load_run_config(kConfigs / config);
        std::string slopes;
        bool all_pass = true;
        double target = 0.0, tolerance = 0.0;
        for (std::uint64_t k = 0; k < 5; ++k) {
            RunConfig run = cfg;
            run.seed = *cfg.seed + k;
            const ExperimentReport r = run_config(run, 1);
            bool found = false;
            for (const auto& rec : r.records) {
                if (rec.name != "decay_slope") continue;
                found = true;
                all_pass = all_pass && rec.pass;
                target = rec.bound_or_target;
                tolerance = rec.tolerance;
                slopes += (slopes.empty() ? "" : ",") + fmt(rec.estimate) + (rec.pass ? "" : "(out)");
            }
            all_pass = all_pass && found;
        }
        o.require(all_pass, std::string(config) + " slopes over 5 seeds [" + slopes + "] expected " + fmt(target) +
                                "+-" + fmt(tolerance));
    }
    return o;
}

Outcome exact_w2()
{
    Outcome o;
    Rng rng(1313);
    double worst = 0.0;
    for (Eigen::Index n = 1; n <= 6; ++n) {
        for (Eigen::Index d : {1, 2, 3}) {
            for (int rep = 0; rep < 5; ++rep) {
                SampleSet a, b;
                a.points = Matrix(n, d);
                b.points = Matrix(n, d);
                for (Eigen::Index i = 0; i < n; ++i) {
                    a.points.row(i) = standard_normal(rng, d).transpose();
                    b.points.row(i) = 1.5 * standard_normal(rng, d).transpose();
                }
                worst = std::max(worst, std::abs(wasserstein2_exact(a, b) - oracle::w2_brute_force(a.points, b.points)));
            }
        }
    }
    o.require(worst < 1e-12, "max |assignment - brute force| = " + fmt(worst));

    int violations = 0;
    for (int trial = 0; trial < 50; ++trial) {
        SampleSet s[3];
        for (auto& x : s) {
            x.points = Matrix(30, 2);
            for (Eigen::Index i = 0; i < 30; ++i) x.points.row(i) = (standard_normal(rng, 2) * (1.0 + trial % 3)).transpose();
        }
        const double ab = wasserstein2_exact(s[0], s[1]), ba = wasserstein2_exact(s[1], s[0]);
        const double ac = wasserstein2_exact(s[0], s[2]), bc = wasserstein2_exact(s[1], s[2]);
        if (wasserstein2_exact(s[0], s[0]) != 0.0) ++violations;
        if (!(ab > 0.0) || std::abs(ab - ba) > 1e-12) ++violations;
        if (ac > ab + bc + 1e-12) ++violations;
    }
    o.require(violations == 0, "metric-axiom violations on 50 random triples = " + std::to_string(violations));
    return o;
}

Outcome reproducibility()
{
    Outcome o;
    const fs::path dir = fs::temp_directory_path() / "follmer_acceptance";
    fs::create_directories(dir);
    int compared = 0;
    std::vector<std::string> mismatched;
    for (const auto& entry : fs::directory_iterator(kConfigs)) {
        if (entry.path().extension() != ".json") continue;
        const auto cfg = nlohmann::json::parse(slurp(entry.path()));
        if (!cfg.contains("experiment")) continue;
        std::string bodies[2];
        int codes[2];
        for (int k = 0; k < 2; ++k) {
            const fs::path out = dir / ("repro_" + std::to_string(k) + ".json");
            fs::remove(out);
            codes[k] = run_shell(kCli + " verify --config " + entry.path().string() + " --threads " + (k ? "8" : "1") +
                                 " --out " + out.string() + " >/dev/null 2>&1");
            auto j = nlohmann::ordered_json::parse(slurp(out));
            j.erase("timing");
            bodies[k] = j.dump();
        }
        ++compared;
        if (bodies[0] != bodies[1] || codes[0] != codes[1]) mismatched.push_back(entry.path().filename().string());
    }
    std::string names;
    for (const auto& n : mismatched) names += " " + n;
    o.require(compared > 0 && mismatched.empty(),
              std::to_string(compared) + " verify configs, threads 1 vs 8, mismatches:" + (names.empty() ? " none" : names));
    return o;
}

struct Criterion {
    int id;
    const char* title;
    double budget_seconds;
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> criteria{
        {1, "identity flow", 1.0, identity_flow},
        {2, "analytic Gaussian oracle", 5.0, gaussian_oracle},
        {3, "Jacobian formula vs central differences", 10.0, jacobian_formula},
        {4, "spectral bound on mix-sym", 10.0, spectral_bounds},
        {5, "Lipschitz bound of the time-1 map", 60.0, lipschitz_bound},
        {6, "marginal law", 120.0, marginal_law},
        {7, "Monte Carlo velocity consistency", 120.0, estimator_consistency},
        {8, "time-change equivalence", 30.0, time_change},
        {9, "reverse SDE marginal", 60.0, reverse_sde},
        {10, "constants vs quadrature", 1.0, constants},
        {11, "functional-inequality consistency", 120.0, functional},
        {12, "concentration slopes", 300.0, concentration},
        {13, "exact W2 oracle", 5.0, exact_w2},
        {14, "reproducibility across thread counts", kInf, reproducibility},
    };

    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.budget_seconds;
        const bool pass = out.pass && in_time;
        failures += pass ? 0 : 1;
        std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.title << "): " << out.detail
                  << " [" << fmt(secs) << " s" << (std::isfinite(c.budget_seconds) ? ", budget " + fmt(c.budget_seconds) + " s" : "")
                  << (in_time ? "" : ", OVER BUDGET") << "]" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
