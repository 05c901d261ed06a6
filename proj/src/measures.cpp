#include "follmer/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace follmer {

std::string format_point(const Vector& x)
{
    std::ostringstream out;
    out.precision(17);
    out << '(';
    for (Eigen::Index i = 0; i < x.size(); ++i) out << (i ? ", " : "") << x[i];
    out << ')';
    return out.str();
}

double log_sum_exp(const double* values, std::size_t n)
{
    double top = -kInf;
    for (std::size_t i = 0; i < n; ++i) top = std::max(top, values[i]);
    if (top == -kInf) return -kInf;
    if (top == kInf) return kInf;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::exp(values[i] - top);
    return top + std::log(acc);
}

void ConvexityProfile::validate() const
{
    if (std::isnan(kappa) || std::isnan(beta) || std::isnan(D)) throw DomainError("convexity profile: NaN entry");
    if (kappa == kInf) throw DomainError("convexity profile: kappa must be finite or -inf");
    if (beta <= 0.0) throw DomainError("convexity profile: beta must be positive");
    if (std::isfinite(kappa) && std::isfinite(beta) && kappa > beta) {
        throw DomainError("convexity profile: kappa exceeds beta");
    }
    if (!(D > 0.0)) throw DomainError("convexity profile: D must be positive");
    if (mixture) {
        if (!(mixture->sigma > 0.0) || !std::isfinite(mixture->sigma)) {
            throw DomainError("convexity profile: mixture sigma must be positive and finite");
        }
        if (!(mixture->R >= 0.0) || !std::isfinite(mixture->R)) {
            throw DomainError("convexity profile: mixture R must be nonnegative and finite");
        }
    }
    if (!admissible()) {
        throw DomainError("convexity profile: no admissible branch applies "
                          "(need kappa > 0, or finite kappa with finite D, or mixture parameters)");
    }
}

Vector TargetMeasure::sample(Rng&) const { throw DomainError("target measure has no sampler"); }

Matrix TargetMeasure::sample(Rng& rng, Eigen::Index n) const
{
    Matrix out(n, dim());
    for (Eigen::Index i = 0; i < n; ++i) out.row(i) = sample(rng).transpose();
    return out;
}

GaussianMixture::GaussianMixture(std::vector<double> weights, std::vector<Vector> centers, double sigma)
    : weights_(std::move(weights)), centers_(std::move(centers)), sigma_(sigma)
{
    if (weights_.empty()) throw DomainError("gaussian mixture: at least one component required");
    if (weights_.size() != centers_.size()) {
        throw DimensionError("gaussian mixture: weights and centers differ in length");
    }
    if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) throw DomainError("gaussian mixture: sigma must be positive");
    dim_ = centers_.front().size();
    if (dim_ <= 0) throw DimensionError("gaussian mixture: dimension must be positive");

    double total = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
            throw DomainError("gaussian mixture: weights must be nonnegative");
        }
        require_dim(dim_, centers_[i].size(), "gaussian mixture center");
        if (!centers_[i].allFinite()) throw DomainError("gaussian mixture: non-finite center");
        total += weights_[i];
        radius_ = std::max(radius_, centers_[i].norm());
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("gaussian mixture: weights must sum to 1");

    log_weights_.reserve(weights_.size());
    cumulative_.reserve(weights_.size());
    double running = 0.0;
    for (double w : weights_) {
        log_weights_.push_back(w > 0.0 ? std::log(w) : -kInf);
        running += w;
        cumulative_.push_back(running);
    }
}

Vector GaussianMixture::mean() const
{
    Vector m = Vector::Zero(dim_);
    for (std::size_t i = 0; i < size(); ++i) m += weights_[i] * centers_[i];
    return m;
}

double GaussianMixture::log_density(const Vector& x) const
{
    require_dim(dim_, x.size(), "mixture_log_density");
    const double var = sigma_ * sigma_;
    std::vector<double> terms(size());
    for (std::size_t i = 0; i < size(); ++i) {
        terms[i] = log_weights_[i] - (x - centers_[i]).squaredNorm() / (2.0 * var);
    }
    return log_sum_exp(terms.data(), terms.size()) -
           0.5 * static_cast<double>(dim_) * std::log(2.0 * std::numbers::pi * var);
}

double GaussianMixture::log_relative_density(const Vector& x) const
{
    return log_density(x) + 0.5 * x.squaredNorm();
}

std::optional<Vector> GaussianMixture::score(const Vector& x) const
{
    require_dim(dim_, x.size(), "mixture score");
    const Vector resp = tilted_weights(*this, 1.0, x);
    Vector s = Vector::Zero(dim_);
    for (std::size_t i = 0; i < size(); ++i) s += resp[static_cast<Eigen::Index>(i)] * (centers_[i] - x);
    return s / (sigma_ * sigma_);
}

Matrix GaussianMixture::log_density_hessian(const Vector& x) const
{
    require_dim(dim_, x.size(), "mixture hessian");
    const Vector resp = tilted_weights(*this, 1.0, x);
    Vector bar = Vector::Zero(dim_);
    for (std::size_t i = 0; i < size(); ++i) bar += resp[static_cast<Eigen::Index>(i)] * centers_[i];
    Matrix spread = Matrix::Zero(dim_, dim_);
    for (std::size_t i = 0; i < size(); ++i) {
        const Vector dev = centers_[i] - bar;
        spread.noalias() += resp[static_cast<Eigen::Index>(i)] * dev * dev.transpose();
    }
    const double var = sigma_ * sigma_;
    return spread / (var * var) - Matrix::Identity(dim_, dim_) / var;
}

Vector GaussianMixture::sample(Rng& rng) const
{
    std::uniform_real_distribution<double> uniform(0.0, cumulative_.back());
    const double u = uniform(rng);
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    std::size_t k = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
    k = std::min(k, size() - 1);
    while (weights_[k] == 0.0 && k > 0) --k;
    return centers_[k] + sigma_ * standard_normal(rng, dim_);
}

ConvexityProfile GaussianMixture::profile() const { return convexity_profile(*this); }

GaussianMixture GaussianMixture::transformed(const Matrix& Q) const
{
    if (Q.rows() != dim_ || Q.cols() != dim_) throw DimensionError("mixture transform: matrix must be dim x dim");
    std::vector<Vector> moved;
    moved.reserve(size());
    for (const auto& c : centers_) moved.emplace_back(Q * c);
    return GaussianMixture(weights_, std::move(moved), sigma_);
}

double mixture_log_density(const GaussianMixture& m, const Vector& x) { return m.log_density(x); }

Vector tilted_weights(const GaussianMixture& m, double t, const Vector& x)
{
    require_dim(m.dim(), x.size(), "tilted_weights");
    const double s2 = m.sigma() * m.sigma();
    const double spread = 1.0 + (s2 - 1.0) * t * t;
    std::vector<double> logits(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double w = m.weights()[i];
        logits[i] = (w > 0.0 ? std::log(w) : -kInf) - (x - t * m.centers()[i]).squaredNorm() / (2.0 * spread);
    }
    // Normalize after shifting by the top logit; going through log_sum_exp
    // would lose digits when the logits are huge.
    const double top = *std::max_element(logits.begin(), logits.end());
    if (!std::isfinite(top)) throw NumericalError("tilted_weights: normalizer underflow at x = " + format_point(x));
    Vector out(static_cast<Eigen::Index>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i) out[static_cast<Eigen::Index>(i)] = std::exp(logits[i] - top);
    return out / out.sum();
}

TiltedMixture mixture_posterior(const GaussianMixture& m, double t, const Vector& x)
{
    if (!(t >= 0.0)) throw DomainError("mixture_posterior: t must be >= 0");
    if (!(t < 1.0)) throw DomainError("mixture_posterior: t must be < 1");
    require_dim(m.dim(), x.size(), "mixture_posterior");

    const double s2 = m.sigma() * m.sigma();
    const double one_minus = 1.0 - t * t;
    const double spread = 1.0 + (s2 - 1.0) * t * t;

    TiltedMixture out;
    out.weights = tilted_weights(m, t, x);
    out.variance = s2 * one_minus / spread;
    out.means.resize(m.dim(), static_cast<Eigen::Index>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i) {
        out.means.col(static_cast<Eigen::Index>(i)) = (one_minus * m.centers()[i] + s2 * t * x) / spread;
    }
    return out;
}

Vector TiltedMixture::mean() const { return means * weights; }

Matrix TiltedMixture::covariance() const
{
    const Vector mu = mean();
    Matrix cov = variance * Matrix::Identity(means.rows(), means.rows());
    for (Eigen::Index i = 0; i < means.cols(); ++i) {
        const Vector dev = means.col(i) - mu;
        cov.noalias() += weights[i] * dev * dev.transpose();
    }
    return cov;
}

ConvexityProfile convexity_profile(const GaussianMixture& m)
{
    ConvexityProfile p;
    p.mixture = MixtureParams{m.sigma(), m.radius()};
    if (m.size() == 1) {
        p.kappa = p.beta = 1.0 / (m.sigma() * m.sigma());
        p.D = kInf;
    }
    return p;
}

} // namespace follmer
