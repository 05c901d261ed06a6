#pragma once

#include "follmer/common.hpp"
#include "follmer/measures.hpp"
#include "follmer/sample_set.hpp"
#include "follmer/velocity.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace follmer {

enum class GridScheme { Uniform, Cosine, Custom };
enum class Method { Euler, Rk4 };

std::string to_string(GridScheme s);
std::string to_string(Method m);
GridScheme parse_grid_scheme(const std::string& s);
Method parse_method(const std::string& s);

// Strictly increasing nodes 0 = t_0 < ... < t_K <= 1 with K >= 1.
class TimeGrid {
public:
    static TimeGrid uniform(int steps, double t_end = 1.0);
    // t_k = t_end * sin(pi k / (2K)): nodes cluster near t_end.
    static TimeGrid cosine(int steps, double t_end = 1.0);
    static TimeGrid custom(std::vector<double> nodes);
    static TimeGrid make(GridScheme scheme, int steps, double t_end = 1.0);

    const std::vector<double>& nodes() const { return nodes_; }
    GridScheme scheme() const { return scheme_; }
    int steps() const { return static_cast<int>(nodes_.size()) - 1; }
    double back() const { return nodes_.back(); }
    // Index of the node equal to t (within 1e-12), if any.
    std::optional<std::size_t> find(double t) const;

private:
    TimeGrid(std::vector<double> nodes, GridScheme scheme);
    std::vector<double> nodes_;
    GridScheme scheme_;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<Matrix> jacobians;  // empty unless propagated
    std::vector<double> op_norms;   // empty unless propagated

    const Vector& final_state() const { return states.back(); }
};

double operator_norm(const Matrix& a);

// Fixed-step integration of dx/dt = v(t, x) over the grid nodes.
Trajectory integrate(const VelocityField& v, const Vector& x0, const TimeGrid& grid, Method method);

// Joint integration of the state and the variational equation
// d/dt J = grad V(t, X_t) J with J(0) = I, sharing the scheme's stages.
Trajectory jacobian_along_flow(const VelocityField& v, const JacobianField& jac, const Vector& x0,
                               const TimeGrid& grid, Method method);

struct PushForwardOptions {
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

// Standard Gaussian draws for particles [0, n): particle i uses substream (seed, i).
SampleSet gaussian_inputs(Eigen::Index dim, Eigen::Index n, std::uint64_t seed);

// Pushes n standard Gaussian draws through the flow to the last grid node.
SampleSet push_forward_samples(const VelocityField& v, Eigen::Index dim, Eigen::Index n, const TimeGrid& grid,
                               Method method, const PushForwardOptions& opts);

// Same particles as push_forward_samples, recorded at every grid node listed in
// `node_indices`.
std::vector<SampleSet> push_forward_marginals(const VelocityField& v, Eigen::Index dim, Eigen::Index n,
                                              const TimeGrid& grid, Method method,
                                              std::span<const std::size_t> node_indices,
                                              const PushForwardOptions& opts);

// Euler-Maruyama paths of dX = -X/(1-t) dt + sqrt(2/(1-t)) dW started from target
// draws. `grid` must end at or before 1 - eps. Returns the ensemble at every node.
std::vector<SampleSet> reverse_sde_simulate(const TargetMeasure& target, const TimeGrid& grid, double eps,
                                            Eigen::Index n, const PushForwardOptions& opts);

// Grid on [0, 1 - eps] uniform in s = -log(1 - t), so the step shrinks like (1 - t).
TimeGrid reverse_sde_grid(int steps, double eps);

// Integrates the reversed flow dX/dt = -V(1 - t, X) on the t-nodes 1 - exp(-s_k)
// and its reparameterization dY/ds = -exp(-s) V(exp(-s), Y) on the s-nodes, both
// with RK4 from x0, and returns the largest |X - Y| over matched nodes.
double time_change_check(const VelocityField& v, const Vector& x0, std::span<const double> s_grid);

} // namespace follmer
