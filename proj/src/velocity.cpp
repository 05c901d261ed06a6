#include "follmer/velocity.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace follmer {

namespace {

void check_time(double t, bool allow_one, const char* what)
{
    if (!(t >= 0.0) || t > 1.0 || (!allow_one && t >= 1.0)) {
        throw DomainError(std::string(what) + ": time " + std::to_string(t) + " outside " +
                          (allow_one ? "[0, 1]" : "[0, 1)"));
    }
}

struct Extremes {
    double max;
    double min;
};

double power_iteration(const Matrix& a, double tol = 1e-13, int max_iter = 20000)
{
    Vector v = Vector::Ones(a.rows()).normalized();
    double lambda = v.dot(a * v);
    for (int it = 0; it < max_iter; ++it) {
        Vector w = a * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = w / norm;
        const double next = v.dot(a * v);
        if (std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) return next;
        lambda = next;
    }
    return lambda;
}

Extremes symmetric_extremes(const Matrix& a)
{
    if (a.rows() <= 64) {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) throw NumericalError("jacobian: eigen-decomposition failed");
        return {solver.eigenvalues().maxCoeff(), solver.eigenvalues().minCoeff()};
    }
    // Gershgorin bounds make both shifted operators positive semidefinite.
    double lo = kInf;
    double hi = -kInf;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double radius = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
        lo = std::min(lo, a(i, i) - radius);
        hi = std::max(hi, a(i, i) + radius);
    }
    const Matrix id = Matrix::Identity(a.rows(), a.cols());
    return {power_iteration(a - lo * id) + lo, hi - power_iteration(hi * id - a)};
}

} // namespace

JacobianEval make_jacobian_eval(Matrix matrix)
{
    if (!matrix.allFinite()) throw NumericalError("jacobian: non-finite entries");
    JacobianEval out;
    out.matrix = std::move(matrix);
    const auto ext = symmetric_extremes(0.5 * (out.matrix + out.matrix.transpose()));
    out.lambda_max = ext.max;
    out.lambda_min = ext.min;
    return out;
}

VelocityEval velocity_exact(const GaussianMixture& m, double t, const Vector& x)
{
    check_time(t, true, "velocity_exact");
    require_dim(m.dim(), x.size(), "velocity_exact");

    const double shift = m.sigma() * m.sigma() - 1.0;
    const double spread = 1.0 + shift * t * t;
    const Vector w = tilted_weights(m, t, x);
    Vector bar = Vector::Zero(m.dim());
    for (std::size_t i = 0; i < m.size(); ++i) bar += w[static_cast<Eigen::Index>(i)] * m.centers()[i];

    VelocityEval out;
    out.value = (bar + shift * t * x) / spread;
    if (t < 1.0) out.posterior_mean = ((1.0 - t * t) * bar + m.sigma() * m.sigma() * t * x) / spread;
    if (!out.value.allFinite()) {
        throw NumericalError("velocity_exact: non-finite value at t = " + std::to_string(t) + ", x = " + format_point(x));
    }
    return out;
}

VelocityEval velocity_mc(const TargetMeasure& target, double t, const Vector& x, std::int64_t n, Rng& rng)
{
    if (!(t > 0.0 && t < 1.0)) throw DomainError("velocity_mc: t must lie in (0, 1)");
    if (n < 2) throw DomainError("velocity_mc: need at least 2 samples");
    require_dim(target.dim(), x.size(), "velocity_mc");

    const Eigen::Index d = target.dim();
    const double s = std::sqrt(1.0 - t * t);
    const auto count = static_cast<Eigen::Index>(n);

    Matrix z(d, count);
    std::vector<double> logw(static_cast<std::size_t>(n));
    const Vector center = t * x;
    double top = -kInf;
    for (Eigen::Index j = 0; j < count; ++j) {
        z.col(j) = standard_normal(rng, d);
        const double lw = target.log_relative_density(center + s * z.col(j));
        if (std::isnan(lw)) throw NumericalError("velocity_mc: log relative density returned NaN");
        logw[static_cast<std::size_t>(j)] = lw;
        top = std::max(top, lw);
    }
    if (top == -kInf) {
        throw NumericalError("velocity_mc: every importance weight underflowed; "
                             "tilt too far in tail, increase n or clamp x");
    }

    Vector w(count);
    for (Eigen::Index j = 0; j < count; ++j) w[j] = std::exp(logw[static_cast<std::size_t>(j)] - top);
    const double total = w.sum();
    const Vector weighted = z * w;

    VelocityEval out;
    out.value = weighted / (s * total);
    out.posterior_mean = center + s * weighted / total;
    out.n_samples = n;

    // Leave-one-out replicates of the ratio estimator.
    Vector replicate_mean = Vector::Zero(d);
    Matrix replicates(d, count);
    bool degenerate = false;
    for (Eigen::Index j = 0; j < count; ++j) {
        const double rest = total - w[j];
        if (!(rest > 0.0)) {
            degenerate = true;
            break;
        }
        replicates.col(j) = (weighted - w[j] * z.col(j)) / (s * rest);
        replicate_mean += replicates.col(j);
    }
    if (degenerate) {
        out.mc_stderr = kInf;
    } else {
        replicate_mean /= static_cast<double>(count);
        const Vector sq = (replicates.colwise() - replicate_mean).rowwise().squaredNorm();
        const double scale = static_cast<double>(count - 1) / static_cast<double>(count);
        out.mc_stderr = std::sqrt(scale * sq.maxCoeff());
    }
    if (!out.value.allFinite()) throw NumericalError("velocity_mc: non-finite estimate");
    return out;
}

JacobianEval jacobian_exact(const GaussianMixture& m, double t, const Vector& x)
{
    check_time(t, false, "jacobian_exact");
    require_dim(m.dim(), x.size(), "jacobian_exact");
    const Eigen::Index d = m.dim();
    if (t == 0.0) return make_jacobian_eval(Matrix::Zero(d, d));

    const TiltedMixture tilt = mixture_posterior(m, t, x);
    const double one_minus = 1.0 - t * t;
    Matrix jac = (t / (one_minus * one_minus)) * tilt.covariance();
    jac.diagonal().array() -= t / one_minus;
    return make_jacobian_eval(std::move(jac));
}

JacobianEval jacobian_endpoint(const GaussianMixture& m, const Vector& x)
{
    Matrix jac = m.log_density_hessian(x);
    jac.diagonal().array() += 1.0;
    return make_jacobian_eval(std::move(jac));
}

JacobianEval jacobian_fd(const VelocityField& v, double t, const Vector& x, double h)
{
    if (!(h > 0.0)) throw DomainError("jacobian_fd: step must be positive");
    const Eigen::Index d = x.size();
    Matrix jac(d, d);
    Vector probe = x;
    for (Eigen::Index i = 0; i < d; ++i) {
        probe[i] = x[i] + h;
        const Vector plus = v(t, probe);
        probe[i] = x[i] - h;
        const Vector minus = v(t, probe);
        probe[i] = x[i];
        require_dim(d, plus.size(), "jacobian_fd");
        jac.col(i) = (plus - minus) / (2.0 * h);
    }
    return make_jacobian_eval(0.5 * (jac + jac.transpose()));
}

VelocityField exact_velocity_field(const GaussianMixture& m)
{
    return [m](double t, const Vector& x) { return velocity_exact(m, t, x).value; };
}

JacobianField exact_jacobian_field(const GaussianMixture& m)
{
    return [m](double t, const Vector& x) {
        return t < 1.0 ? jacobian_exact(m, t, x).matrix : jacobian_endpoint(m, x).matrix;
    };
}

} // namespace follmer
