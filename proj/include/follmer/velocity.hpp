#pragma once

#include "follmer/common.hpp"
#include "follmer/measures.hpp"
#include "follmer/random.hpp"

#include <cstdint>
#include <functional>
#include <optional>

namespace follmer {

struct VelocityEval {
    Vector value;
    std::optional<Vector> posterior_mean;
    std::optional<double> mc_stderr;  // max over coordinates
    std::optional<std::int64_t> n_samples;
};

struct JacobianEval {
    Matrix matrix;
    double lambda_max = 0.0;
    double lambda_min = 0.0;
};

// V(t, x) and its spatial Jacobian as plain callables, the form consumed by the
// integrators.
using VelocityField = std::function<Vector(double t, const Vector& x)>;
using JacobianField = std::function<Matrix(double t, const Vector& x)>;

// Exact Föllmer velocity of a Gaussian mixture for t in [0, 1].
//
// With a = 1 + (sigma^2 - 1) t^2 and tilted weights w~, the tilted-mean form
// (m(t,x) - t x) / (1 - t^2) reduces to (sum_i w~_i mu_i + (sigma^2 - 1) t x) / a.
// That expression has no removable singularity at either endpoint: at t = 0 it is
// the target mean, at t = 1 it is x + grad log p(x).
VelocityEval velocity_exact(const GaussianMixture& m, double t, const Vector& x);

// Self-normalized importance-sampling estimate of V(t, x) for 0 < t < 1 from
// n standard Gaussian draws: V ≈ sum_j z_j r(y_j) / (sqrt(1 - t^2) sum_j r(y_j)),
// y_j = t x + sqrt(1 - t^2) z_j. The stderr is the leave-one-out jackknife.
VelocityEval velocity_mc(const TargetMeasure& target, double t, const Vector& x, std::int64_t n, Rng& rng);

// Jacobian of V through the tilted covariance, 0 <= t < 1.
JacobianEval jacobian_exact(const GaussianMixture& m, double t, const Vector& x);

// Jacobian at t = 1: I + Hessian of log p.
JacobianEval jacobian_endpoint(const GaussianMixture& m, const Vector& x);

// Central-difference Jacobian of an arbitrary velocity field, symmetrized.
JacobianEval jacobian_fd(const VelocityField& v, double t, const Vector& x, double h = 1e-4);

// Eigen-extremes of a symmetric matrix: dense solver for dim <= 64, power
// iteration above.
JacobianEval make_jacobian_eval(Matrix matrix);

VelocityField exact_velocity_field(const GaussianMixture& m);
// Uses jacobian_exact on [0, 1) and jacobian_endpoint at t = 1.
JacobianField exact_jacobian_field(const GaussianMixture& m);

} // namespace follmer
