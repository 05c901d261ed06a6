#include "follmer/flow.hpp"

#include "follmer/parallel.hpp"
#include "follmer/random.hpp"

#include <cmath>
#include <numbers>

namespace follmer {

std::string to_string(GridScheme s)
{
    switch (s) {
    case GridScheme::Uniform: return "uniform";
    case GridScheme::Cosine: return "cosine";
    case GridScheme::Custom: return "custom";
    }
    return "unknown";
}

std::string to_string(Method m) { return m == Method::Euler ? "euler" : "rk4"; }

GridScheme parse_grid_scheme(const std::string& s)
{
    if (s == "uniform") return GridScheme::Uniform;
    if (s == "cosine") return GridScheme::Cosine;
    if (s == "custom") return GridScheme::Custom;
    throw ConfigError("unknown grid scheme '" + s + "' (expected uniform|cosine|custom)");
}

Method parse_method(const std::string& s)
{
    if (s == "euler") return Method::Euler;
    if (s == "rk4") return Method::Rk4;
    throw ConfigError("unknown integration method '" + s + "' (expected euler|rk4)");
}

TimeGrid::TimeGrid(std::vector<double> nodes, GridScheme scheme) : nodes_(std::move(nodes)), scheme_(scheme)
{
    if (nodes_.size() < 2) throw DomainError("time grid: need at least one step");
    if (nodes_.front() != 0.0) throw DomainError("time grid: first node must be 0");
    if (nodes_.back() > 1.0) throw DomainError("time grid: nodes must lie in [0, 1]");
    for (std::size_t k = 1; k < nodes_.size(); ++k) {
        if (!(nodes_[k] > nodes_[k - 1])) throw DomainError("time grid: nodes must be strictly increasing");
    }
}

TimeGrid TimeGrid::uniform(int steps, double t_end)
{
    if (steps < 1) throw DomainError("time grid: steps must be >= 1");
    std::vector<double> nodes(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) nodes[static_cast<std::size_t>(k)] = t_end * k / steps;
    nodes.back() = t_end;
    return TimeGrid(std::move(nodes), GridScheme::Uniform);
}

TimeGrid TimeGrid::cosine(int steps, double t_end)
{
    if (steps < 1) throw DomainError("time grid: steps must be >= 1");
    std::vector<double> nodes(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) {
        nodes[static_cast<std::size_t>(k)] = t_end * std::sin(0.5 * std::numbers::pi * k / steps);
    }
    nodes.front() = 0.0;
    nodes.back() = t_end;
    return TimeGrid(std::move(nodes), GridScheme::Cosine);
}

TimeGrid TimeGrid::custom(std::vector<double> nodes) { return TimeGrid(std::move(nodes), GridScheme::Custom); }

TimeGrid TimeGrid::make(GridScheme scheme, int steps, double t_end)
{
    switch (scheme) {
    case GridScheme::Uniform: return uniform(steps, t_end);
    case GridScheme::Cosine: return cosine(steps, t_end);
    case GridScheme::Custom: break;
    }
    throw DomainError("time grid: custom grids need explicit nodes");
}

std::optional<std::size_t> TimeGrid::find(double t) const
{
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        if (std::abs(nodes_[k] - t) <= 1e-12) return k;
    }
    return std::nullopt;
}

double operator_norm(const Matrix& a)
{
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

namespace {

void check_state(double t, const Vector& x)
{
    if (!x.allFinite()) {
        throw NumericalError("integrate: non-finite state at t = " + std::to_string(t) + ", x = " + format_point(x));
    }
}

// One step from (t, x) to t + h.
Vector step(const VelocityField& v, double t, double h, const Vector& x, Method method)
{
    if (method == Method::Euler) return x + h * v(t, x);
    const Vector k1 = v(t, x);
    const Vector k2 = v(t + 0.5 * h, x + 0.5 * h * k1);
    const Vector k3 = v(t + 0.5 * h, x + 0.5 * h * k2);
    const Vector k4 = v(t + h, x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Integrates over arbitrary increasing nodes; nodes need not lie in [0, 1].
std::vector<Vector> integrate_nodes(const VelocityField& v, const Vector& x0, std::span<const double> nodes,
                                    Method method)
{
    std::vector<Vector> states;
    states.reserve(nodes.size());
    check_state(nodes.front(), x0);
    states.push_back(x0);
    for (std::size_t k = 1; k < nodes.size(); ++k) {
        const double t = nodes[k - 1];
        Vector next = step(v, t, nodes[k] - t, states.back(), method);
        check_state(nodes[k], next);
        states.push_back(std::move(next));
    }
    return states;
}

} // namespace

Trajectory integrate(const VelocityField& v, const Vector& x0, const TimeGrid& grid, Method method)
{
    Trajectory out;
    out.times = grid.nodes();
    out.states = integrate_nodes(v, x0, grid.nodes(), method);
    return out;
}

Trajectory jacobian_along_flow(const VelocityField& v, const JacobianField& jac, const Vector& x0,
                               const TimeGrid& grid, Method method)
{
    const auto& nodes = grid.nodes();
    const Eigen::Index d = x0.size();
    Trajectory out;
    out.times = nodes;
    out.states.reserve(nodes.size());
    out.jacobians.reserve(nodes.size());
    out.op_norms.reserve(nodes.size());

    check_state(0.0, x0);
    Vector x = x0;
    Matrix j = Matrix::Identity(d, d);
    out.states.push_back(x);
    out.jacobians.push_back(j);
    out.op_norms.push_back(1.0);

    for (std::size_t k = 1; k < nodes.size(); ++k) {
        const double t = nodes[k - 1];
        const double h = nodes[k] - t;
        if (method == Method::Euler) {
            const Vector dx = v(t, x);
            const Matrix dj = jac(t, x) * j;
            x += h * dx;
            j += h * dj;
        } else {
            const Vector k1 = v(t, x);
            const Matrix m1 = jac(t, x) * j;
            const Vector x2 = x + 0.5 * h * k1;
            const Vector k2 = v(t + 0.5 * h, x2);
            const Matrix m2 = jac(t + 0.5 * h, x2) * (j + 0.5 * h * m1);
            const Vector x3 = x + 0.5 * h * k2;
            const Vector k3 = v(t + 0.5 * h, x3);
            const Matrix m3 = jac(t + 0.5 * h, x3) * (j + 0.5 * h * m2);
            const Vector x4 = x + h * k3;
            const Vector k4 = v(t + h, x4);
            const Matrix m4 = jac(t + h, x4) * (j + h * m3);
            x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            j += (h / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
        }
        check_state(nodes[k], x);
        if (!j.allFinite()) throw NumericalError("jacobian_along_flow: non-finite Jacobian at t = " + std::to_string(nodes[k]));
        out.states.push_back(x);
        out.jacobians.push_back(j);
        out.op_norms.push_back(operator_norm(j));
    }
    return out;
}

SampleSet gaussian_inputs(Eigen::Index dim, Eigen::Index n, std::uint64_t seed)
{
    SampleSet out;
    out.points.resize(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        Rng rng = substream(seed, static_cast<std::uint64_t>(i));
        out.points.row(i) = standard_normal(rng, dim).transpose();
    }
    out.provenance = "gaussian_inputs(seed=" + std::to_string(seed) + ")";
    return out;
}

std::vector<SampleSet> push_forward_marginals(const VelocityField& v, Eigen::Index dim, Eigen::Index n,
                                              const TimeGrid& grid, Method method,
                                              std::span<const std::size_t> node_indices,
                                              const PushForwardOptions& opts)
{
    if (n < 1) throw DomainError("push_forward: n must be >= 1");
    for (std::size_t idx : node_indices) {
        if (idx >= grid.nodes().size()) throw DomainError("push_forward: node index out of range");
    }
    const SampleSet inputs = gaussian_inputs(dim, n, opts.seed);
    std::vector<SampleSet> out(node_indices.size());
    for (std::size_t k = 0; k < node_indices.size(); ++k) {
        out[k].points.resize(n, dim);
        out[k].provenance = "push_forward(seed=" + std::to_string(opts.seed) +
                            ", t=" + std::to_string(grid.nodes()[node_indices[k]]) + ")";
    }

    parallel_for(static_cast<std::size_t>(n), opts.threads, [&](std::size_t i) {
        const auto row = static_cast<Eigen::Index>(i);
        std::vector<Vector> states;
        try {
            states = integrate_nodes(v, inputs.points.row(row).transpose(), grid.nodes(), method);
        } catch (const NumericalError& e) {
            throw NumericalError("particle " + std::to_string(i) + ": " + e.what());
        }
        for (std::size_t k = 0; k < node_indices.size(); ++k) {
            out[k].points.row(row) = states[node_indices[k]].transpose();
        }
    });
    return out;
}

SampleSet push_forward_samples(const VelocityField& v, Eigen::Index dim, Eigen::Index n, const TimeGrid& grid,
                               Method method, const PushForwardOptions& opts)
{
    const std::size_t last = grid.nodes().size() - 1;
    return std::move(push_forward_marginals(v, dim, n, grid, method, std::span(&last, 1), opts).front());
}

TimeGrid reverse_sde_grid(int steps, double eps)
{
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("reverse_sde_grid: eps must lie in (0, 1)");
    if (steps < 1) throw DomainError("reverse_sde_grid: steps must be >= 1");
    const double s_end = -std::log(eps);
    std::vector<double> nodes(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) nodes[static_cast<std::size_t>(k)] = -std::expm1(-s_end * k / steps);
    nodes.front() = 0.0;
    nodes.back() = 1.0 - eps;
    return TimeGrid::custom(std::move(nodes));
}

std::vector<SampleSet> reverse_sde_simulate(const TargetMeasure& target, const TimeGrid& grid, double eps,
                                            Eigen::Index n, const PushForwardOptions& opts)
{
    if (!(eps > 0.0)) throw DomainError("reverse_sde_simulate: eps must be positive");
    if (grid.back() > 1.0 - eps + 1e-15) throw DomainError("reverse_sde_simulate: grid extends beyond 1 - eps");
    if (!target.has_sampler()) throw DomainError("reverse_sde_simulate: target has no sampler");
    if (n < 1) throw DomainError("reverse_sde_simulate: n must be >= 1");

    const auto& nodes = grid.nodes();
    const Eigen::Index d = target.dim();
    std::vector<SampleSet> out(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        out[k].points.resize(n, d);
        out[k].provenance = "reverse_sde(seed=" + std::to_string(opts.seed) + ", t=" + std::to_string(nodes[k]) + ")";
    }

    parallel_for(static_cast<std::size_t>(n), opts.threads, [&](std::size_t i) {
        const auto row = static_cast<Eigen::Index>(i);
        Rng rng = substream(opts.seed, i);
        Vector x = target.sample(rng);
        out[0].points.row(row) = x.transpose();
        for (std::size_t k = 1; k < nodes.size(); ++k) {
            const double t = nodes[k - 1];
            const double h = nodes[k] - t;
            const double decay = 1.0 / (1.0 - t);
            x += -decay * h * x + std::sqrt(2.0 * decay * h) * standard_normal(rng, d);
            check_state(nodes[k], x);
            out[k].points.row(row) = x.transpose();
        }
    });
    return out;
}

double time_change_check(const VelocityField& v, const Vector& x0, std::span<const double> s_grid)
{
    if (s_grid.size() < 2) throw DomainError("time_change_check: need at least two s nodes");
    for (std::size_t k = 0; k < s_grid.size(); ++k) {
        if (!std::isfinite(s_grid[k]) || s_grid[k] < 0.0) throw DomainError("time_change_check: s nodes must be finite and >= 0");
        if (k > 0 && !(s_grid[k] > s_grid[k - 1])) throw DomainError("time_change_check: s nodes must increase");
    }

    std::vector<double> t_nodes(s_grid.size());
    for (std::size_t k = 0; k < s_grid.size(); ++k) t_nodes[k] = -std::expm1(-s_grid[k]);

    const VelocityField reversed = [&v](double t, const Vector& x) -> Vector { return -v(1.0 - t, x); };
    const VelocityField heat = [&v](double s, const Vector& x) -> Vector {
        const double decay = std::exp(-s);
        return -decay * v(decay, x);
    };

    const auto in_t = integrate_nodes(reversed, x0, t_nodes, Method::Rk4);
    const auto in_s = integrate_nodes(heat, x0, s_grid, Method::Rk4);
    double worst = 0.0;
    for (std::size_t k = 0; k < in_t.size(); ++k) worst = std::max(worst, (in_t[k] - in_s[k]).norm());
    return worst;
}

} // namespace follmer
