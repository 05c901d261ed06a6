#include "follmer/metrics.hpp"
#include "follmer/presets.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace follmer;

namespace {

SampleSet gaussian_cloud(Rng& rng, Eigen::Index n, Eigen::Index d, double scale = 1.0, double shift = 0.0)
{
    SampleSet s;
    s.points.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i) s.points.row(i) = (scale * standard_normal(rng, d)).array() + shift;
    return s;
}

SampleSet from_values(std::initializer_list<double> xs)
{
    SampleSet s;
    s.points.resize(static_cast<Eigen::Index>(xs.size()), 1);
    Eigen::Index i = 0;
    for (double x : xs) s.points(i++, 0) = x;
    return s;
}

} // namespace

TEST_CASE("exact W2 matches brute force over permutations")
{
    Rng rng(2024);
    for (Eigen::Index n = 1; n <= 6; ++n) {
        for (Eigen::Index d : {1, 2, 3}) {
            const SampleSet a = gaussian_cloud(rng, n, d);
            const SampleSet b = gaussian_cloud(rng, n, d, 2.0, 0.5);
            CAPTURE(n);
            CAPTURE(d);
            CHECK(std::abs(wasserstein2_exact(a, b) - oracle::w2_brute_force(a.points, b.points)) < 1e-12);
        }
    }
}

TEST_CASE("exact W2 simple values")
{
    Rng rng(1);
    const SampleSet a = gaussian_cloud(rng, 30, 2);
    CHECK(wasserstein2_exact(a, a) == 0.0);
    CHECK(wasserstein2_exact(from_values({0.0}), from_values({1.0})) == doctest::Approx(1.0));
    // A rigid shift costs exactly its length.
    SampleSet shifted = a;
    shifted.points.col(0).array() += 3.0;
    CHECK(wasserstein2_exact(a, shifted) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("exact W2 is symmetric and satisfies the triangle inequality")
{
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const SampleSet a = gaussian_cloud(rng, 40, 2);
        const SampleSet b = gaussian_cloud(rng, 40, 2, 1.5);
        const SampleSet c = gaussian_cloud(rng, 40, 2, 0.5, 1.0);
        const double ab = wasserstein2_exact(a, b);
        CHECK(ab == doctest::Approx(wasserstein2_exact(b, a)).epsilon(1e-12));
        CHECK(wasserstein2_exact(a, c) <= ab + wasserstein2_exact(b, c) + 1e-12);
    }
}

TEST_CASE("exact W2 input validation")
{
    Rng rng(1);
    CHECK_THROWS_AS(wasserstein2_exact(gaussian_cloud(rng, 3, 2), gaussian_cloud(rng, 4, 2)), DimensionError);
    CHECK_THROWS_AS(wasserstein2_exact(gaussian_cloud(rng, 3, 2), gaussian_cloud(rng, 3, 1)), DimensionError);
    CHECK_THROWS_AS(wasserstein2_exact(gaussian_cloud(rng, 4097, 1), gaussian_cloud(rng, 4097, 1)), DomainError);
    CHECK(solve_assignment(Matrix(0, 0)).empty());
}

TEST_CASE("one-dimensional W2 with unequal sizes")
{
    CHECK(wasserstein2_1d({0.0}, {1.0}) == doctest::Approx(1.0));
    // Quantile functions {0 on [0,1/2), 1 on [1/2,1)} against 0.5 everywhere.
    CHECK(wasserstein2_1d({0.0, 1.0}, {0.5}) == doctest::Approx(0.5));
    // Brute force by expanding both to a common size of 6.
    const std::vector<double> a{0.3, -1.0, 2.0};
    const std::vector<double> b{1.0, 0.0};
    const double expanded = wasserstein2_exact(from_values({-1, -1, 0.3, 0.3, 2, 2}), from_values({0, 0, 0, 1, 1, 1}));
    CHECK(wasserstein2_1d(a, b) == doctest::Approx(expanded).epsilon(1e-12));
    CHECK_THROWS_AS(wasserstein2_1d({}, {1.0}), DomainError);
}

TEST_CASE("sliced W2 in one dimension equals exact W2")
{
    Rng rng(8);
    const SampleSet a = gaussian_cloud(rng, 200, 1);
    const SampleSet b = gaussian_cloud(rng, 200, 1, 1.3, 0.2);
    const SlicedEstimate s = sliced_w2(a, b, 16, rng);
    CHECK(std::abs(s.value - wasserstein2_exact(a, b)) < 1e-10);
}

TEST_CASE("sliced W2 never exceeds exact W2")
{
    Rng rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        const SampleSet a = gaussian_cloud(rng, 100, 3);
        const SampleSet b = gaussian_cloud(rng, 100, 3, 0.7, 0.3);
        CHECK(sliced_w2(a, b, 64, rng).value <= wasserstein2_exact(a, b) + 1e-9);
    }
}

TEST_CASE("sliced W2 of a mean shift is |m| / sqrt(d)")
{
    Rng rng(10);
    const Eigen::Index n = 10000;
    const SampleSet a = gaussian_cloud(rng, n, 2);
    SampleSet b = gaussian_cloud(rng, n, 2);
    b.points.col(0).array() += 2.0;
    const SlicedEstimate s = sliced_w2(a, b, 128, rng);
    CHECK(s.value == doctest::Approx(2.0 / std::sqrt(2.0)).epsilon(0.1));
    CHECK(s.stderr_ > 0.0);
}

TEST_CASE("sliced reference agrees with the direct estimator and is thread independent")
{
    Rng rng(11);
    const SampleSet ref = gaussian_cloud(rng, 500, 2);
    const SampleSet a = gaussian_cloud(rng, 300, 2, 1.2);
    const Matrix dirs = random_directions(2, 32, rng);
    const SlicedReference cached(ref, dirs);
    const SlicedEstimate direct = sliced_w2(a, ref, dirs);
    CHECK(cached.distance(a).value == doctest::Approx(direct.value).epsilon(1e-14));
    CHECK(cached.distance(a, 4).value == cached.distance(a, 1).value);
    CHECK((dirs.rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-14);
}

TEST_CASE("empirical Lipschitz of linear maps")
{
    Rng rng(12);
    const Matrix x = gaussian_cloud(rng, 50, 3).points;
    CHECK(empirical_lipschitz(x, x) == doctest::Approx(1.0));
    CHECK(empirical_lipschitz(x, 0.5 * x) == doctest::Approx(0.5));
    Matrix dup(3, 1);
    dup << 1.0, 1.0, 2.0;
    CHECK(empirical_lipschitz(dup, 3.0 * dup) == doctest::Approx(3.0));
    CHECK_THROWS_AS(empirical_lipschitz(x.topRows(1), x.topRows(1)), DomainError);
    CHECK_THROWS_AS(empirical_lipschitz(x, x.topRows(4)), DimensionError);
}

TEST_CASE("Poincare estimate of Gaussians")
{
    Rng rng(13);
    const Eigen::Index n = 100000;
    const std::vector<TestFunction> coord{{"x0", [](const Vector& x) { return x[0]; },
                                           [](const Vector& x) { return Vector(Vector::Unit(x.size(), 0)); }}};
    CHECK(empirical_poincare(gaussian_cloud(rng, n, 2), coord).value == doctest::Approx(1.0).epsilon(0.05));
    CHECK(empirical_poincare(gaussian_cloud(rng, n, 2, 2.0), coord).value == doctest::Approx(4.0).epsilon(0.05));

    // The full family cannot beat the optimal constant by more than noise.
    const SampleSet s = gaussian_cloud(rng, n, 2);
    const FunctionalEstimate e = empirical_poincare(s, default_poincare_family(2, rng), 20, 3);
    CHECK(e.value <= 1.0 + 4.0 * e.bootstrap_stderr + 0.02);
    CHECK(e.value >= 0.95);
    CHECK(e.bootstrap_stderr > 0.0);
}

TEST_CASE("log-Sobolev estimate of Gaussians")
{
    Rng rng(14);
    const Eigen::Index n = 100000;
    // For f = exp(s x / 2) under N(0, v): Ent(f^2) / E|f'|^2 = 2 v exactly.
    const double s = 0.1;
    const std::vector<TestFunction> expo{{"e", [s](const Vector& x) { return std::exp(0.5 * s * x[0]); },
                                          [s](const Vector& x) {
                                              return Vector(0.5 * s * std::exp(0.5 * s * x[0]) * Vector::Unit(x.size(), 0));
                                          }}};
    CHECK(empirical_log_sobolev(gaussian_cloud(rng, n, 1), expo).value == doctest::Approx(2.0).epsilon(0.1));

    // Scaling samples by c scales the ratio by c^2 for the scaled test function.
    const SampleSet base = gaussian_cloud(rng, 20000, 1);
    SampleSet scaled = base;
    scaled.points *= 3.0;
    const std::vector<TestFunction> f{{"2+sin", [](const Vector& x) { return 2.0 + std::sin(x[0]); },
                                       [](const Vector& x) { return Vector(Vector::Constant(1, std::cos(x[0]))); }}};
    const std::vector<TestFunction> g{{"2+sin/3", [](const Vector& x) { return 2.0 + std::sin(x[0] / 3.0); },
                                       [](const Vector& x) { return Vector(Vector::Constant(1, std::cos(x[0] / 3.0) / 3.0)); }}};
    CHECK(empirical_log_sobolev(scaled, g).value == doctest::Approx(9.0 * empirical_log_sobolev(base, f).value).epsilon(1e-10));
}

TEST_CASE("functional estimates on a mixture stay below the transported constants")
{
    const GaussianMixture m = preset("mix-r1");
    Rng rng(15);
    SampleSet s;
    s.points = m.sample(rng, 50000);
    const double L2 = std::exp(1.0);
    const FunctionalEstimate p = empirical_poincare(s, default_poincare_family(2, rng), 20, 1);
    const FunctionalEstimate ls = empirical_log_sobolev(s, default_log_sobolev_family(2, rng), 20, 2);
    CHECK(p.value <= L2 + 3.0 * p.bootstrap_stderr);
    CHECK(ls.value <= 2.0 * L2 + 3.0 * ls.bootstrap_stderr);
    CHECK(p.value > 1.0);
}

TEST_CASE("functional estimates reject degenerate input")
{
    Rng rng(16);
    const SampleSet s = gaussian_cloud(rng, 10, 1);
    CHECK_THROWS_AS(empirical_poincare(s, {}), DomainError);
    const std::vector<TestFunction> flat{{"c", [](const Vector&) { return 1.0; },
                                          [](const Vector& x) { return Vector(Vector::Zero(x.size())); }}};
    CHECK_THROWS_AS(empirical_poincare(s, flat), DomainError);
}
