#pragma once

#include "follmer/common.hpp"
#include "follmer/random.hpp"
#include "follmer/sample_set.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace follmer {

inline constexpr Eigen::Index kExactW2Cap = 4096;

// Minimum-cost perfect matching of a square cost matrix (shortest augmenting
// paths with dual potentials, O(n^3)). Returns the column assigned to each row.
std::vector<Eigen::Index> solve_assignment(const Matrix& cost);

// W2 between two equal-size empirical measures, solved as an assignment problem.
double wasserstein2_exact(const SampleSet& a, const SampleSet& b);

// Exact W2 between two empirical measures on the line (sizes may differ),
// integrating the squared difference of the quantile functions.
double wasserstein2_1d(std::vector<double> a, std::vector<double> b);

struct SlicedEstimate {
    double value = 0.0;   // sqrt of the mean squared 1D W2 over directions
    double stderr_ = 0.0; // delta-method error across directions
};

// n_proj x dim matrix of uniformly random unit directions.
Matrix random_directions(Eigen::Index dim, int n_proj, Rng& rng);

SlicedEstimate sliced_w2(const SampleSet& a, const SampleSet& b, const Matrix& directions, unsigned threads = 1);
SlicedEstimate sliced_w2(const SampleSet& a, const SampleSet& b, int n_proj, Rng& rng, unsigned threads = 1);

// Sliced W2 against a fixed reference sample with its projections sorted once.
class SlicedReference {
public:
    SlicedReference(const SampleSet& reference, Matrix directions);
    SlicedEstimate distance(const SampleSet& a, unsigned threads = 1) const;
    const Matrix& directions() const { return directions_; }

private:
    Matrix directions_;
    std::vector<std::vector<double>> sorted_;
};

// max_{i != j} |y_i - y_j| / |x_i - x_j| over rows; coincident inputs are skipped.
double empirical_lipschitz(const Matrix& inputs, const Matrix& outputs);

struct TestFunction {
    std::string name;
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
};

// Coordinates, pairwise products (squares included) and sin(w.x) for eight
// random frequencies w ~ N(0, I).
std::vector<TestFunction> default_poincare_family(Eigen::Index dim, Rng& rng);
// exp(s x_i / 2) for s in {0.1, 0.5, 1} and 2 + sin(w.x) for eight random w.
std::vector<TestFunction> default_log_sobolev_family(Eigen::Index dim, Rng& rng);

struct FunctionalEstimate {
    double value = 0.0;
    std::string best_function;
    double bootstrap_stderr = 0.0;
};

// Lower estimate of the Poincare constant: max_f Var(f) / E|grad f|^2.
FunctionalEstimate empirical_poincare(const SampleSet& samples, const std::vector<TestFunction>& family,
                                      int bootstrap = 0, std::uint64_t seed = 0);

// Lower estimate of the log-Sobolev constant in the convention
// Ent(f^2) <= C_LS E|grad f|^2: max_f Ent(f^2) / E|grad f|^2.
FunctionalEstimate empirical_log_sobolev(const SampleSet& samples, const std::vector<TestFunction>& family,
                                         int bootstrap = 0, std::uint64_t seed = 0);

} // namespace follmer
