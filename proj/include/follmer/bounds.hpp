#pragma once

#include "follmer/measures.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace follmer {

enum class ThetaCase { KappaD2AtLeastOne, KappaD2BelowOne, KappaNegative, Mixture };

std::string to_string(ThetaCase c);

// Piecewise upper bound theta_t on lambda_max(grad V(t, .)) over [0, 1].
class ThetaProfile {
public:
    ThetaCase case_tag() const { return case_; }
    // Breakpoint between the bounded-support and log-concave branches.
    std::optional<double> t0() const { return t0_; }
    double operator()(double t) const;
    // exp(int_0^1 theta), in closed form.
    double lipschitz_constant() const { return lipschitz_; }
    // exp(int_0^t theta), in closed form.
    double growth_bound(double t) const;

    static ThetaProfile log_concave(double kappa);
    static ThetaProfile bounded_support(double kappa, double D);
    static ThetaProfile mixture(double sigma, double R);

private:
    ThetaCase case_ = ThetaCase::KappaD2AtLeastOne;
    double kappa_ = 1.0;
    double D_ = kInf;
    double sigma_ = 1.0;
    double R_ = 0.0;
    std::optional<double> t0_;
    double lipschitz_ = 1.0;
};

// Picks the applicable branch; when several apply, the one with the smallest
// Lipschitz constant. Throws DomainError when none applies.
ThetaProfile theta_profile(const ConvexityProfile& profile);

struct AffineConstants {
    double lambda_min = 1.0;
    double lambda_max = 1.0;
    double R = 0.0;

    double psi_sobolev_half() const;  // (1/2) lambda_max exp(R^2 / lambda_min)
    double C_P() const;
    double C_LS() const;
    double isoperimetric_C() const;   // sqrt(lambda_min lambda_max) exp(R^2 / (2 lambda_min))
    double q_poincare(int q) const;
};

struct ConstantsReport {
    ThetaCase case_tag = ThetaCase::Mixture;
    std::optional<double> t0;
    double lipschitz = 1.0;
    double C_P = 1.0;
    double C_LS = 2.0;
    double psi_sobolev_half = 0.5;  // generic Psi-Sobolev constant L^2 / 2
    double isoperimetric_C = 1.0;
    double T2_C = 1.0;
    std::optional<AffineConstants> affine_case;

    // (q - 1)^{q/2} L^q for even q >= 2.
    double q_poincare(int q) const;
};

ConstantsReport functional_constants(const ConvexityProfile& profile,
                                     std::optional<AffineConstants> affine = std::nullopt);

struct ConcentrationBound {
    double deviation_term = 0.0;
    double mean_term = 0.0;
    double total = 0.0;
    // The deviation term with the transport constant in the denominator, i.e.
    // sqrt(log(1/eps) / (n C)), reported for comparison.
    double deviation_term_constant_in_denominator = 0.0;
};

// Rate of E W_2(nu_n, nu) in n, without constants: n^{-1/2}, n^{-1/2} log(1+n), n^{-2/d}.
double empirical_rate(int d, double n);

ConcentrationBound concentration_bound(const ConvexityProfile& profile, int d, std::int64_t n, double eps,
                                       double fifth_moment, double c_d);

double gaussian_cdf(double x);

// Validates q as an even integer >= 2.
void check_even_q(int q);

} // namespace follmer
