#include "follmer/bounds.hpp"

#include <cmath>
#include <numbers>

namespace follmer {

std::string to_string(ThetaCase c)
{
    switch (c) {
    case ThetaCase::KappaD2AtLeastOne: return "kappaD2_ge_1";
    case ThetaCase::KappaD2BelowOne: return "kappaD2_lt_1";
    case ThetaCase::KappaNegative: return "kappa_negative";
    case ThetaCase::Mixture: return "mixture";
    }
    return "unknown";
}

namespace {

double log_concave_theta(double kappa, double t) { return t * (1.0 - kappa) / (t * t * (1.0 - kappa) + kappa); }

double support_theta(double D, double t)
{
    const double one_minus = 1.0 - t * t;
    return t * (t * t + D * D - 1.0) / (one_minus * one_minus);
}

} // namespace

ThetaProfile ThetaProfile::log_concave(double kappa)
{
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("theta profile: log-concave branch needs 0 < kappa < inf");
    ThetaProfile p;
    p.case_ = ThetaCase::KappaD2AtLeastOne;
    p.kappa_ = kappa;
    p.lipschitz_ = 1.0 / std::sqrt(kappa);
    return p;
}

ThetaProfile ThetaProfile::bounded_support(double kappa, double D)
{
    if (!std::isfinite(kappa) || !(D > 0.0) || !std::isfinite(D)) {
        throw DomainError("theta profile: bounded-support branch needs finite kappa and 0 < D < inf");
    }
    if (kappa * D * D >= 1.0) return log_concave(kappa);
    ThetaProfile p;
    p.case_ = kappa < 0.0 ? ThetaCase::KappaNegative : ThetaCase::KappaD2BelowOne;
    p.kappa_ = kappa;
    p.D_ = D;
    p.t0_ = std::sqrt((1.0 - kappa * D * D) / ((1.0 - kappa) * D * D + 1.0));
    p.lipschitz_ = D * std::exp(0.5 * (1.0 - kappa * D * D));
    return p;
}

ThetaProfile ThetaProfile::mixture(double sigma, double R)
{
    if (!(sigma > 0.0) || !std::isfinite(sigma) || !(R >= 0.0) || !std::isfinite(R)) {
        throw DomainError("theta profile: mixture branch needs sigma > 0 and finite R >= 0");
    }
    ThetaProfile p;
    p.case_ = ThetaCase::Mixture;
    p.sigma_ = sigma;
    p.R_ = R;
    p.lipschitz_ = sigma * std::exp(R * R / (2.0 * sigma * sigma));
    return p;
}

double ThetaProfile::operator()(double t) const
{
    switch (case_) {
    case ThetaCase::KappaD2AtLeastOne: return log_concave_theta(kappa_, t);
    case ThetaCase::KappaD2BelowOne:
    case ThetaCase::KappaNegative: return t <= *t0_ ? support_theta(D_, t) : log_concave_theta(kappa_, t);
    case ThetaCase::Mixture: {
        const double shift = sigma_ * sigma_ - 1.0;
        const double a = 1.0 + shift * t * t;
        return t * (shift * a + R_ * R_) / (a * a);
    }
    }
    return 0.0;
}

double ThetaProfile::growth_bound(double t) const
{
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("theta profile: t outside [0, 1]");
    switch (case_) {
    case ThetaCase::KappaD2AtLeastOne: return std::sqrt((kappa_ + (1.0 - kappa_) * t * t) / kappa_);
    case ThetaCase::KappaD2BelowOne:
    case ThetaCase::KappaNegative: {
        const double D2 = D_ * D_;
        const double head = [&](double u) {
            return (u * u + D2 - 1.0) / (2.0 * (1.0 - u * u)) - 0.5 * (D2 - 1.0) + 0.5 * std::log1p(-u * u);
        }(std::min(t, *t0_));
        if (t <= *t0_) return std::exp(head);
        const double t0 = *t0_;
        const double tail = 0.5 * std::log((t * t * (1.0 - kappa_) + kappa_) / (t0 * t0 * (1.0 - kappa_) + kappa_));
        return std::exp(head + tail);
    }
    case ThetaCase::Mixture: {
        const double shift = sigma_ * sigma_ - 1.0;
        const double a = 1.0 + shift * t * t;
        return std::sqrt(a) * std::exp(0.5 * R_ * R_ * t * t / a);
    }
    }
    return 1.0;
}

ThetaProfile theta_profile(const ConvexityProfile& profile)
{
    profile.validate();
    std::optional<ThetaProfile> best;
    auto consider = [&](ThetaProfile p) {
        if (!best || p.lipschitz_constant() < best->lipschitz_constant()) best = p;
    };
    if (profile.log_concave_branch()) {
        consider(std::isfinite(profile.D) ? ThetaProfile::bounded_support(profile.kappa, profile.D)
                                          : ThetaProfile::log_concave(profile.kappa));
    } else if (profile.bounded_support_branch()) {
        consider(ThetaProfile::bounded_support(profile.kappa, profile.D));
    }
    if (profile.mixture) consider(ThetaProfile::mixture(profile.mixture->sigma, profile.mixture->R));
    return *best;
}

void check_even_q(int q)
{
    if (q < 2 || q % 2 != 0) throw DomainError("q-Poincare: q must be an even integer >= 2");
}

double AffineConstants::psi_sobolev_half() const { return 0.5 * lambda_max * std::exp(R * R / lambda_min); }
double AffineConstants::C_P() const { return 2.0 * psi_sobolev_half(); }
double AffineConstants::C_LS() const { return 4.0 * psi_sobolev_half(); }
double AffineConstants::isoperimetric_C() const
{
    return std::sqrt(lambda_min * lambda_max) * std::exp(R * R / (2.0 * lambda_min));
}
double AffineConstants::q_poincare(int q) const
{
    check_even_q(q);
    const double half = 0.5 * q;
    return std::pow(q - 1.0, half) * std::pow(lambda_min * lambda_max, half) * std::exp(q * R * R / (2.0 * lambda_min));
}

double ConstantsReport::q_poincare(int q) const
{
    check_even_q(q);
    return std::pow(q - 1.0, 0.5 * q) * std::pow(lipschitz, q);
}

ConstantsReport functional_constants(const ConvexityProfile& profile, std::optional<AffineConstants> affine)
{
    const ThetaProfile theta = theta_profile(profile);
    const double L = theta.lipschitz_constant();
    ConstantsReport out;
    out.case_tag = theta.case_tag();
    out.t0 = theta.t0();
    out.lipschitz = L;
    out.C_P = L * L;
    out.C_LS = 2.0 * L * L;
    out.psi_sobolev_half = 0.5 * L * L;
    out.isoperimetric_C = L;
    out.T2_C = L * L;
    if (affine) {
        if (!(affine->lambda_min > 0.0) || affine->lambda_min > affine->lambda_max || !(affine->R >= 0.0)) {
            throw DomainError("affine constants: need 0 < lambda_min <= lambda_max and R >= 0");
        }
        out.affine_case = affine;
    }
    return out;
}

double empirical_rate(int d, double n)
{
    if (d < 4) return 1.0 / std::sqrt(n);
    if (d == 4) return std::log1p(n) / std::sqrt(n);
    return std::pow(n, -2.0 / d);
}

ConcentrationBound concentration_bound(const ConvexityProfile& profile, int d, std::int64_t n, double eps,
                                       double fifth_moment, double c_d)
{
    if (d < 1) throw DomainError("concentration_bound: d must be >= 1");
    if (n < 1) throw DomainError("concentration_bound: n must be >= 1");
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("concentration_bound: eps must lie in (0, 1)");
    if (!(fifth_moment >= 0.0) || !std::isfinite(fifth_moment)) throw DomainError("concentration_bound: fifth moment must be finite");
    if (!(c_d > 0.0)) throw DomainError("concentration_bound: c_d must be positive");

    const double C = functional_constants(profile).T2_C;
    const double nn = static_cast<double>(n);
    const double log_inv = -std::log(eps);
    ConcentrationBound out;
    out.deviation_term = std::sqrt(C * log_inv / nn);
    out.deviation_term_constant_in_denominator = std::sqrt(log_inv / (nn * C));
    out.mean_term = c_d * std::pow(fifth_moment, 0.4) * empirical_rate(d, nn);
    out.total = out.deviation_term + out.mean_term;
    return out;
}

double gaussian_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

} // namespace follmer
