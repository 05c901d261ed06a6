#include "follmer/metrics.hpp"

#include "follmer/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace follmer {

std::vector<Eigen::Index> solve_assignment(const Matrix& cost)
{
    const Eigen::Index n = cost.rows();
    if (cost.cols() != n) throw DimensionError("solve_assignment: cost matrix must be square");
    if (!cost.allFinite()) throw NumericalError("solve_assignment: non-finite cost");
    if (n == 0) return {};

    constexpr double inf = std::numeric_limits<double>::infinity();
    const auto N = static_cast<std::size_t>(n);
    // 1-based rows/columns; column 0 is the virtual source of each augmentation.
    std::vector<double> u(N + 1, 0.0), v(N + 1, 0.0), minv(N + 1);
    std::vector<std::size_t> owner(N + 1, 0), way(N + 1, 0);
    std::vector<char> used(N + 1);

    for (std::size_t row = 1; row <= N; ++row) {
        owner[0] = row;
        std::size_t col0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[col0] = 1;
            const std::size_t r = owner[col0];
            double delta = inf;
            std::size_t col1 = 0;
            for (std::size_t c = 1; c <= N; ++c) {
                if (used[c]) continue;
                const double reduced =
                    cost(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c - 1)) - u[r] - v[c];
                if (reduced < minv[c]) {
                    minv[c] = reduced;
                    way[c] = col0;
                }
                if (minv[c] < delta) {
                    delta = minv[c];
                    col1 = c;
                }
            }
            for (std::size_t c = 0; c <= N; ++c) {
                if (used[c]) {
                    u[owner[c]] += delta;
                    v[c] -= delta;
                } else {
                    minv[c] -= delta;
                }
            }
            col0 = col1;
        } while (owner[col0] != 0);
        do {
            const std::size_t col1 = way[col0];
            owner[col0] = owner[col1];
            col0 = col1;
        } while (col0 != 0);
    }

    std::vector<Eigen::Index> assignment(N);
    for (std::size_t c = 1; c <= N; ++c) assignment[owner[c] - 1] = static_cast<Eigen::Index>(c - 1);
    return assignment;
}

double wasserstein2_exact(const SampleSet& a, const SampleSet& b)
{
    if (a.size() != b.size()) throw DimensionError("wasserstein2_exact: sample sets differ in size");
    require_dim(a.dim(), b.dim(), "wasserstein2_exact");
    if (a.size() > kExactW2Cap) throw DomainError("wasserstein2_exact: n exceeds the exact-solver cap of 4096");
    const Eigen::Index n = a.size();
    if (n == 0) throw DomainError("wasserstein2_exact: empty sample sets");

    Matrix cost(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) cost(i, j) = (a.points.row(i) - b.points.row(j)).squaredNorm();
    }
    const auto assignment = solve_assignment(cost);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += cost(i, assignment[static_cast<std::size_t>(i)]);
    return std::sqrt(total / static_cast<double>(n));
}

namespace {

// Sorted inputs; positions along [0, 1] are tracked in units of 1/(n m).
double w2_squared_sorted(const std::vector<double>& a, const std::vector<double>& b)
{
    const auto n = static_cast<std::int64_t>(a.size());
    const auto m = static_cast<std::int64_t>(b.size());
    std::int64_t i = 0, j = 0, pos = 0;
    double acc = 0.0;
    while (i < n && j < m) {
        const std::int64_t a_end = (i + 1) * m;
        const std::int64_t b_end = (j + 1) * n;
        const std::int64_t next = std::min(a_end, b_end);
        const double diff = a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(j)];
        acc += static_cast<double>(next - pos) * diff * diff;
        pos = next;
        if (a_end == next) ++i;
        if (b_end == next) ++j;
    }
    return acc / (static_cast<double>(n) * static_cast<double>(m));
}

std::vector<double> project_sorted(const Matrix& points, const Vector& direction)
{
    const Vector proj = points * direction;
    std::vector<double> out(proj.data(), proj.data() + proj.size());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

double wasserstein2_1d(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty()) throw DomainError("wasserstein2_1d: empty input");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return std::sqrt(w2_squared_sorted(a, b));
}

Matrix random_directions(Eigen::Index dim, int n_proj, Rng& rng)
{
    if (n_proj < 1) throw DomainError("random_directions: need at least one projection");
    Matrix out(n_proj, dim);
    for (int k = 0; k < n_proj; ++k) out.row(k) = random_unit_vector(rng, dim).transpose();
    return out;
}

namespace {

SlicedEstimate summarize_projections(const std::vector<double>& sq)
{
    const auto P = static_cast<double>(sq.size());
    double mean = 0.0;
    for (double s : sq) mean += s;
    mean /= P;
    double var = 0.0;
    for (double s : sq) var += (s - mean) * (s - mean);
    var = sq.size() > 1 ? var / (P - 1.0) : 0.0;

    SlicedEstimate out;
    out.value = std::sqrt(mean);
    out.stderr_ = out.value > 0.0 ? std::sqrt(var / P) / (2.0 * out.value) : 0.0;
    return out;
}

} // namespace

SlicedEstimate sliced_w2(const SampleSet& a, const SampleSet& b, const Matrix& directions, unsigned threads)
{
    require_dim(a.dim(), b.dim(), "sliced_w2");
    require_dim(a.dim(), directions.cols(), "sliced_w2 directions");
    if (a.size() == 0 || b.size() == 0) throw DomainError("sliced_w2: empty sample set");
    const auto P = static_cast<std::size_t>(directions.rows());
    std::vector<double> sq(P);
    parallel_for(P, threads, [&](std::size_t k) {
        const Vector dir = directions.row(static_cast<Eigen::Index>(k)).transpose();
        sq[k] = w2_squared_sorted(project_sorted(a.points, dir), project_sorted(b.points, dir));
    });
    return summarize_projections(sq);
}

SlicedReference::SlicedReference(const SampleSet& reference, Matrix directions) : directions_(std::move(directions))
{
    require_dim(reference.dim(), directions_.cols(), "SlicedReference");
    if (reference.size() == 0) throw DomainError("SlicedReference: empty reference");
    for (Eigen::Index k = 0; k < directions_.rows(); ++k) {
        sorted_.push_back(project_sorted(reference.points, directions_.row(k).transpose()));
    }
}

SlicedEstimate SlicedReference::distance(const SampleSet& a, unsigned threads) const
{
    require_dim(directions_.cols(), a.dim(), "SlicedReference::distance");
    if (a.size() == 0) throw DomainError("sliced_w2: empty sample set");
    std::vector<double> sq(sorted_.size());
    parallel_for(sq.size(), threads, [&](std::size_t k) {
        sq[k] = w2_squared_sorted(project_sorted(a.points, directions_.row(static_cast<Eigen::Index>(k)).transpose()),
                                  sorted_[k]);
    });
    return summarize_projections(sq);
}

SlicedEstimate sliced_w2(const SampleSet& a, const SampleSet& b, int n_proj, Rng& rng, unsigned threads)
{
    return sliced_w2(a, b, random_directions(a.dim(), n_proj, rng), threads);
}

double empirical_lipschitz(const Matrix& inputs, const Matrix& outputs)
{
    if (inputs.rows() != outputs.rows()) throw DimensionError("empirical_lipschitz: pair count mismatch");
    if (inputs.rows() < 2) throw DomainError("empirical_lipschitz: need at least two pairs");
    double best = 0.0;
    bool any = false;
    for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < inputs.rows(); ++j) {
            const double dx = (inputs.row(i) - inputs.row(j)).norm();
            if (dx == 0.0) continue;
            best = std::max(best, (outputs.row(i) - outputs.row(j)).norm() / dx);
            any = true;
        }
    }
    if (!any) throw DomainError("empirical_lipschitz: all inputs coincide");
    return best;
}

namespace {

std::vector<Vector> random_frequencies(Eigen::Index dim, Rng& rng, int count)
{
    std::vector<Vector> out;
    for (int k = 0; k < count; ++k) out.push_back(standard_normal(rng, dim));
    return out;
}

} // namespace

std::vector<TestFunction> default_poincare_family(Eigen::Index dim, Rng& rng)
{
    std::vector<TestFunction> family;
    for (Eigen::Index i = 0; i < dim; ++i) {
        family.push_back({"x" + std::to_string(i), [i](const Vector& x) { return x[i]; },
                          [i, dim](const Vector&) { return Vector(Vector::Unit(dim, i)); }});
    }
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = i; j < dim; ++j) {
            family.push_back({"x" + std::to_string(i) + "*x" + std::to_string(j),
                              [i, j](const Vector& x) { return x[i] * x[j]; },
                              [i, j, dim](const Vector& x) {
                                  Vector g = Vector::Zero(dim);
                                  g[i] += x[j];
                                  g[j] += x[i];
                                  return g;
                              }});
        }
    }
    int k = 0;
    for (const Vector& w : random_frequencies(dim, rng, 8)) {
        family.push_back({"sin(w" + std::to_string(k++) + ".x)", [w](const Vector& x) { return std::sin(w.dot(x)); },
                          [w](const Vector& x) { return Vector(std::cos(w.dot(x)) * w); }});
    }
    return family;
}

std::vector<TestFunction> default_log_sobolev_family(Eigen::Index dim, Rng& rng)
{
    std::vector<TestFunction> family;
    for (double s : {0.1, 0.5, 1.0}) {
        for (Eigen::Index i = 0; i < dim; ++i) {
            family.push_back({"exp(" + std::to_string(s) + "*x" + std::to_string(i) + "/2)",
                              [s, i](const Vector& x) { return std::exp(0.5 * s * x[i]); },
                              [s, i, dim](const Vector& x) {
                                  return Vector(0.5 * s * std::exp(0.5 * s * x[i]) * Vector::Unit(dim, i));
                              }});
        }
    }
    int k = 0;
    for (const Vector& w : random_frequencies(dim, rng, 8)) {
        family.push_back({"2+sin(w" + std::to_string(k++) + ".x)",
                          [w](const Vector& x) { return 2.0 + std::sin(w.dot(x)); },
                          [w](const Vector& x) { return Vector(std::cos(w.dot(x)) * w); }});
    }
    return family;
}

namespace {

enum class Functional { Poincare, LogSobolev };

// Per-sample columns: value f (or f^2), and |grad f|^2.
struct Tabulated {
    Matrix value;
    Matrix energy;
};

Tabulated tabulate(const SampleSet& samples, const std::vector<TestFunction>& family, Functional kind)
{
    const Eigen::Index n = samples.size();
    const auto K = static_cast<Eigen::Index>(family.size());
    Tabulated tab{Matrix(n, K), Matrix(n, K)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vector x = samples.points.row(i).transpose();
        for (Eigen::Index k = 0; k < K; ++k) {
            const auto& f = family[static_cast<std::size_t>(k)];
            const double v = f.value(x);
            tab.value(i, k) = kind == Functional::LogSobolev ? v * v : v;
            tab.energy(i, k) = f.gradient(x).squaredNorm();
        }
    }
    if (!tab.value.allFinite() || !tab.energy.allFinite()) throw NumericalError("functional estimate: non-finite test function value");
    return tab;
}

// Ratio for column k over the multiset of rows given by `weights` (counts).
double ratio(const Tabulated& tab, Eigen::Index k, const Vector& counts, double total, Functional kind)
{
    double energy = 0.0, first = 0.0, second = 0.0;
    for (Eigen::Index i = 0; i < counts.size(); ++i) {
        const double c = counts[i];
        if (c == 0.0) continue;
        const double v = tab.value(i, k);
        energy += c * tab.energy(i, k);
        first += c * v;
        second += c * (kind == Functional::Poincare ? v * v : (v > 0.0 ? v * std::log(v) : 0.0));
    }
    energy /= total;
    first /= total;
    second /= total;
    if (!(energy > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    if (kind == Functional::Poincare) return std::max(0.0, second - first * first) / energy;
    if (!(first > 0.0)) throw DomainError("empirical_log_sobolev: nonpositive f^2 mass");
    return std::max(0.0, second - first * std::log(first)) / energy;
}

FunctionalEstimate estimate(const SampleSet& samples, const std::vector<TestFunction>& family, int bootstrap,
                            std::uint64_t seed, Functional kind)
{
    if (family.empty()) throw DomainError("functional estimate: empty test family");
    if (samples.size() < 2) throw DomainError("functional estimate: need at least two samples");
    const Tabulated tab = tabulate(samples, family, kind);
    const Eigen::Index n = samples.size();
    const auto K = static_cast<Eigen::Index>(family.size());

    auto best_of = [&](const Vector& counts, Eigen::Index* arg) {
        double best = -1.0;
        for (Eigen::Index k = 0; k < K; ++k) {
            const double r = ratio(tab, k, counts, counts.sum(), kind);
            if (std::isnan(r)) continue;
            if (r > best) {
                best = r;
                if (arg) *arg = k;
            }
        }
        return best;
    };

    FunctionalEstimate out;
    Eigen::Index arg = -1;
    out.value = best_of(Vector::Ones(n), &arg);
    if (arg < 0) throw DomainError("functional estimate: every test function has zero Dirichlet energy");
    out.best_function = family[static_cast<std::size_t>(arg)].name;

    if (bootstrap > 1) {
        Rng rng = substream(seed, 0);
        std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
        std::vector<double> reps;
        Vector counts(n);
        for (int b = 0; b < bootstrap; ++b) {
            counts.setZero();
            for (Eigen::Index i = 0; i < n; ++i) counts[pick(rng)] += 1.0;
            reps.push_back(best_of(counts, nullptr));
        }
        double mean = 0.0;
        for (double r : reps) mean += r;
        mean /= static_cast<double>(reps.size());
        double var = 0.0;
        for (double r : reps) var += (r - mean) * (r - mean);
        out.bootstrap_stderr = std::sqrt(var / static_cast<double>(reps.size() - 1));
    }
    return out;
}

} // namespace

FunctionalEstimate empirical_poincare(const SampleSet& samples, const std::vector<TestFunction>& family, int bootstrap,
                                      std::uint64_t seed)
{
    return estimate(samples, family, bootstrap, seed, Functional::Poincare);
}

FunctionalEstimate empirical_log_sobolev(const SampleSet& samples, const std::vector<TestFunction>& family,
                                         int bootstrap, std::uint64_t seed)
{
    return estimate(samples, family, bootstrap, seed, Functional::LogSobolev);
}

} // namespace follmer
