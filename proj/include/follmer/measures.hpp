#pragma once

#include "follmer/common.hpp"
#include "follmer/random.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace follmer {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct MixtureParams {
    double sigma = 1.0;
    double R = 0.0;
};

// Convexity metadata of a target measure.
//
// kappa: Hessian of -log p is bounded below by kappa*I (-inf when unknown).
// beta:  Hessian of -log p is bounded above by beta*I (+inf when unknown).
// D:     half-diameter of the support scaled by 1/sqrt(2) (+inf for full support).
// mixture: present when the target is N(0, sigma^2 I) convolved with a measure
//          supported on the ball of radius R about the origin.
struct ConvexityProfile {
    double kappa = -kInf;
    double beta = kInf;
    double D = kInf;
    std::optional<MixtureParams> mixture;

    bool log_concave_branch() const { return kappa > 0.0; }
    bool bounded_support_branch() const { return std::isfinite(kappa) && std::isfinite(D); }
    bool admissible() const
    {
        return log_concave_branch() || bounded_support_branch() || mixture.has_value();
    }

    // Throws DomainError if an invariant fails or no admissible branch exists.
    void validate() const;
};

// A probability measure the flow can be steered towards.
class TargetMeasure {
public:
    virtual ~TargetMeasure() = default;

    virtual Eigen::Index dim() const = 0;
    virtual double log_density(const Vector& x) const = 0;
    virtual std::optional<Vector> score(const Vector&) const { return std::nullopt; }

    // log r(x) where r = p / phi is the density relative to the standard
    // Gaussian, up to an additive constant. -inf outside the support.
    virtual double log_relative_density(const Vector& x) const = 0;

    virtual bool has_sampler() const { return false; }
    virtual Vector sample(Rng& rng) const;

    virtual ConvexityProfile profile() const = 0;

    // n x dim matrix of i.i.d. draws.
    Matrix sample(Rng& rng, Eigen::Index n) const;
};

// The Gaussian-mixture target restricted to its tilt at (t, x): still a
// mixture of isotropic Gaussians sharing one variance.
struct TiltedMixture {
    Vector weights;   // k, sums to one
    Matrix means;     // dim x k, column per component
    double variance;  // shared component variance

    Vector mean() const;
    Matrix covariance() const;
};

// sum_i w_i N(mu_i, sigma^2 I_d)
class GaussianMixture final : public TargetMeasure {
public:
    GaussianMixture(std::vector<double> weights, std::vector<Vector> centers, double sigma);

    Eigen::Index dim() const override { return dim_; }
    std::size_t size() const { return weights_.size(); }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<Vector>& centers() const { return centers_; }
    double sigma() const { return sigma_; }
    // max_i |mu_i|, measured from the origin.
    double radius() const { return radius_; }
    Vector mean() const;

    double log_density(const Vector& x) const override;
    std::optional<Vector> score(const Vector& x) const override;
    double log_relative_density(const Vector& x) const override;
    bool has_sampler() const override { return true; }
    Vector sample(Rng& rng) const override;
    using TargetMeasure::sample;
    ConvexityProfile profile() const override;

    // Hessian of log p at x.
    Matrix log_density_hessian(const Vector& x) const;

    // Image of the mixture under x -> Q x for a square matrix Q.
    GaussianMixture transformed(const Matrix& Q) const;

private:
    Eigen::Index dim_ = 0;
    std::vector<double> weights_;
    std::vector<double> log_weights_;
    std::vector<Vector> centers_;
    std::vector<double> cumulative_;
    double sigma_ = 1.0;
    double radius_ = 0.0;
};

double mixture_log_density(const GaussianMixture& m, const Vector& x);

// Tilted measure p^{tx, 1-t^2} for 0 <= t < 1.
TiltedMixture mixture_posterior(const GaussianMixture& m, double t, const Vector& x);

ConvexityProfile convexity_profile(const GaussianMixture& m);

// Normalized weights w_i ∝ w_i N(t mu_i, (1 + (sigma^2-1) t^2) I)(x), valid on
// the closed interval [0, 1]; at t = 1 these are the component responsibilities.
Vector tilted_weights(const GaussianMixture& m, double t, const Vector& x);

// log(sum exp(v)) without overflow; -inf for an all -inf input.
double log_sum_exp(const double* values, std::size_t n);

} // namespace follmer
