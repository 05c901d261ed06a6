#include "follmer/bounds.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace follmer;

namespace {

ConvexityProfile make(double kappa, double D = kInf)
{
    ConvexityProfile p;
    p.kappa = kappa;
    p.D = D;
    return p;
}

ConvexityProfile mixture(double sigma, double R)
{
    ConvexityProfile p;
    p.mixture = MixtureParams{sigma, R};
    return p;
}

} // namespace

TEST_CASE("log-concave branch: kappa = 4")
{
    const ThetaProfile th = theta_profile(make(4.0));
    CHECK(th.case_tag() == ThetaCase::KappaD2AtLeastOne);
    CHECK(th.lipschitz_constant() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_FALSE(th.t0().has_value());
    CHECK(th.lipschitz_constant() == doctest::Approx(oracle::exp_integral_log_concave(4.0)).epsilon(1e-10));
}

TEST_CASE("bounded-support branch: kappa = 0, D = 1")
{
    const ThetaProfile th = theta_profile(make(0.0, 1.0));
    CHECK(th.case_tag() == ThetaCase::KappaD2BelowOne);
    CHECK(*th.t0() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
    CHECK(th.lipschitz_constant() == doctest::Approx(std::exp(0.5)).epsilon(1e-14));
    CHECK(th.lipschitz_constant() == doctest::Approx(oracle::exp_integral_support(0.0, 1.0)).epsilon(1e-8));
}

TEST_CASE("mixture branch: sigma = 1, R = 1")
{
    const ThetaProfile th = theta_profile(mixture(1.0, 1.0));
    CHECK(th.case_tag() == ThetaCase::Mixture);
    CHECK(th.lipschitz_constant() == doctest::Approx(1.64872).epsilon(1e-5));
    CHECK(th.lipschitz_constant() == doctest::Approx(oracle::exp_integral_mixture(1.0, 1.0)).epsilon(1e-10));
}

TEST_CASE("negative kappa uses the same piecewise form")
{
    const ThetaProfile th = theta_profile(make(-1.0, 1.0));
    CHECK(th.case_tag() == ThetaCase::KappaNegative);
    CHECK(th.lipschitz_constant() == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    CHECK(th.lipschitz_constant() == doctest::Approx(oracle::exp_integral_support(-1.0, 1.0)).epsilon(1e-8));
}

TEST_CASE("kappa D^2 >= 1 with finite D falls back to the log-concave constant")
{
    const ThetaProfile th = theta_profile(make(2.0, 1.0));
    CHECK(th.case_tag() == ThetaCase::KappaD2AtLeastOne);
    CHECK(th.lipschitz_constant() == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("inadmissible profiles are rejected")
{
    CHECK_THROWS_AS(theta_profile(make(0.0)), DomainError);
    CHECK_THROWS_AS(theta_profile(ConvexityProfile{}), DomainError);
}

TEST_CASE("the smallest applicable constant wins")
{
    ConvexityProfile p = make(4.0);
    p.mixture = MixtureParams{1.0, 2.0};
    CHECK(theta_profile(p).lipschitz_constant() == doctest::Approx(0.5));
    p.kappa = 0.01;
    p.mixture = MixtureParams{1.0, 0.0};
    CHECK(theta_profile(p).case_tag() == ThetaCase::Mixture);
    CHECK(theta_profile(p).lipschitz_constant() == doctest::Approx(1.0));
}

TEST_CASE("theta is continuous at t0")
{
    for (double D : {0.5, 1.0, 2.0}) {
        for (int i = 0; i < 20; ++i) {
            const double kappa = -2.0 + (1.0 / (D * D) + 2.0) * i / 20.0;
            const ThetaProfile th = ThetaProfile::bounded_support(kappa, D);
            REQUIRE(th.t0().has_value());
            const double t0 = *th.t0();
            CAPTURE(kappa);
            CAPTURE(D);
            CHECK(oracle::support_theta(D, t0) == doctest::Approx(oracle::log_concave_theta(kappa, t0)).epsilon(1e-9));
            CHECK(th(t0 - 1e-12) == doctest::Approx(th(t0 + 1e-12)).epsilon(1e-9));
        }
    }
}

TEST_CASE("closed form agrees with quadrature on random admissible profiles")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const int branch = i % 3;
        double closed = 0.0, quad = 0.0;
        if (branch == 0) {
            const double kappa = 0.05 + 10.0 * U(rng);
            closed = theta_profile(make(kappa)).lipschitz_constant();
            quad = oracle::exp_integral_log_concave(kappa);
        } else if (branch == 1) {
            const double D = 0.3 + 2.5 * U(rng);
            const double kappa = -2.0 + (1.0 / (D * D) + 2.0) * 0.999 * U(rng);
            closed = ThetaProfile::bounded_support(kappa, D).lipschitz_constant();
            quad = oracle::exp_integral_support(kappa, D);
        } else {
            const double sigma = 0.3 + 2.0 * U(rng);
            const double R = 2.0 * U(rng);
            closed = theta_profile(mixture(sigma, R)).lipschitz_constant();
            quad = oracle::exp_integral_mixture(sigma, R);
        }
        CAPTURE(i);
        CHECK(closed == doctest::Approx(quad).epsilon(1e-6));
    }
}

TEST_CASE("growth bound matches the partial integral")
{
    const ThetaProfile lc = ThetaProfile::log_concave(0.3);
    const ThetaProfile mx = ThetaProfile::mixture(0.7, 1.2);
    const ThetaProfile bs = ThetaProfile::bounded_support(0.2, 1.5);
    for (double t : {0.0, 0.2, 0.5, 0.9, 1.0}) {
        CHECK(lc.growth_bound(t) == doctest::Approx(oracle::exp_integral_log_concave(0.3, t)).epsilon(1e-9));
        CHECK(mx.growth_bound(t) == doctest::Approx(oracle::exp_integral_mixture(0.7, 1.2, t)).epsilon(1e-9));
        const double t0 = *bs.t0();
        double log_growth = oracle::integrate([&](double s) { return oracle::support_theta(1.5, s); }, 0.0, std::min(t, t0));
        if (t > t0) log_growth += oracle::integrate([&](double s) { return oracle::log_concave_theta(0.2, s); }, t0, t);
        const double quad = std::exp(log_growth);
        CHECK(bs.growth_bound(t) == doctest::Approx(quad).epsilon(1e-9));
    }
    CHECK(mx.growth_bound(1.0) == doctest::Approx(mx.lipschitz_constant()).epsilon(1e-14));
    CHECK(bs.growth_bound(1.0) == doctest::Approx(bs.lipschitz_constant()).epsilon(1e-12));
    CHECK_THROWS_AS(lc.growth_bound(1.5), DomainError);
}

TEST_CASE("Lipschitz constant is nonincreasing in kappa at fixed D")
{
    for (double D : {0.5, 1.0, 2.0, kInf}) {
        double previous = kInf;
        for (int i = 0; i < 60; ++i) {
            const double kappa = -2.0 + 0.1 * i;
            if (!std::isfinite(D) && kappa <= 0.0) continue;
            const double L = theta_profile(make(kappa, D)).lipschitz_constant();
            CHECK(L <= previous * (1.0 + 1e-12));
            previous = L;
        }
    }
}

TEST_CASE("mixture constant tends to sigma as R vanishes")
{
    for (double sigma : {0.5, 1.0, 3.0}) {
        CHECK(ThetaProfile::mixture(sigma, 1e-6).lipschitz_constant() == doctest::Approx(sigma).epsilon(1e-10));
    }
}

TEST_CASE("functional constants for the sigma = 1, R = 1 mixture")
{
    const ConstantsReport c = functional_constants(mixture(1.0, 1.0));
    CHECK(c.C_P == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    CHECK(c.C_LS == doctest::Approx(2.0 * std::exp(1.0)).epsilon(1e-14));
    CHECK(c.isoperimetric_C == doctest::Approx(std::exp(0.5)));
    CHECK(c.T2_C == doctest::Approx(std::exp(1.0)));
    CHECK(c.psi_sobolev_half == doctest::Approx(0.5 * std::exp(1.0)));
}

TEST_CASE("R = 0 recovers the optimal Gaussian constants")
{
    const ConstantsReport c = functional_constants(mixture(1.0, 0.0));
    CHECK(c.C_P == doctest::Approx(1.0));
    CHECK(c.C_LS == doctest::Approx(2.0));
}

TEST_CASE("q-Poincare constants")
{
    CHECK(functional_constants(make(1.0)).q_poincare(2) == doctest::Approx(1.0));
    for (double kappa : {0.5, 2.0, 4.0}) {
        for (int q : {2, 4, 6}) {
            CHECK(functional_constants(make(kappa)).q_poincare(q) ==
                  doctest::Approx(std::pow((q - 1.0) / kappa, 0.5 * q)).epsilon(1e-13));
        }
    }
    const ConstantsReport c = functional_constants(make(0.0, 1.0));
    CHECK(c.q_poincare(4) == doctest::Approx(9.0 * std::exp(2.0)).epsilon(1e-13));
    CHECK_THROWS_AS(c.q_poincare(3), DomainError);
    CHECK_THROWS_AS(c.q_poincare(0), DomainError);
}

TEST_CASE("affine-case constants")
{
    const AffineConstants a{0.5, 2.0, 1.0};
    CHECK(a.psi_sobolev_half() == doctest::Approx(0.5 * 2.0 * std::exp(2.0)));
    CHECK(a.C_P() == doctest::Approx(2.0 * std::exp(2.0)));
    CHECK(a.C_LS() == doctest::Approx(4.0 * std::exp(2.0)));
    CHECK(a.isoperimetric_C() == doctest::Approx(std::exp(1.0)));
    CHECK(a.q_poincare(2) == doctest::Approx(1.0 * std::exp(2.0)));
    const ConstantsReport c = functional_constants(mixture(1.0, 1.0), a);
    REQUIRE(c.affine_case.has_value());
    CHECK_THROWS_AS(functional_constants(mixture(1.0, 1.0), AffineConstants{2.0, 1.0, 0.0}), DomainError);
}

TEST_CASE("concentration bound")
{
    const ConcentrationBound b = concentration_bound(make(1.0), 2, 100, std::exp(-1.0), 1.0, 1.0);
    CHECK(b.deviation_term == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(b.total == doctest::Approx(b.deviation_term + b.mean_term));
    CHECK(b.mean_term == doctest::Approx(0.1));

    const ConcentrationBound m = concentration_bound(mixture(1.0, 1.0), 2, 400, 0.1, 1.0, 1.0);
    CHECK(m.deviation_term == doctest::Approx(std::sqrt(std::exp(1.0) * std::log(10.0) / 400.0)));
    CHECK(m.deviation_term_constant_in_denominator == doctest::Approx(std::sqrt(std::log(10.0) / (400.0 * std::exp(1.0)))));

    CHECK(concentration_bound(make(1.0), 2, 100, 1.0 - 1e-12, 1.0, 1.0).deviation_term < 1e-5);
    CHECK_THROWS_AS(concentration_bound(make(1.0), 2, 100, 0.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(concentration_bound(make(1.0), 2, 0, 0.5, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(concentration_bound(make(1.0), 2, 10, 0.5, 1.0, 0.0), DomainError);
}

TEST_CASE("empirical rates")
{
    CHECK(empirical_rate(2, 100.0) == doctest::Approx(0.1));
    CHECK(empirical_rate(4, 100.0) == doctest::Approx(std::log(101.0) / 10.0));
    CHECK(empirical_rate(6, 1000.0) == doctest::Approx(0.1));
    const double m5 = 32.0;
    const ConcentrationBound b = concentration_bound(make(1.0), 6, 1000, 0.5, m5, 3.0);
    CHECK(b.mean_term == doctest::Approx(3.0 * 4.0 * 0.1));
}

TEST_CASE("Gaussian CDF")
{
    CHECK(gaussian_cdf(0.0) == 0.5);
    CHECK(gaussian_cdf(40.0) == 1.0);
    const double quad = 0.5 + oracle::integrate([](double y) { return oracle::normal_pdf(y, 0.0, 1.0); }, 0.0, 1.0);
    CHECK(std::abs(gaussian_cdf(1.0) - quad) < 1e-12);
    CHECK(std::abs(gaussian_cdf(1.0) - 0.841345) < 1e-6);
    CHECK(gaussian_cdf(-1.0) == doctest::Approx(1.0 - quad).epsilon(1e-12));
}
