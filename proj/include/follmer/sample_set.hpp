#pragma once

#include "follmer/common.hpp"

#include <string>

namespace follmer {

// A set of points in R^d, one per row.
struct SampleSet {
    Matrix points;
    std::string provenance;

    Eigen::Index size() const { return points.rows(); }
    Eigen::Index dim() const { return points.cols(); }
};

} // namespace follmer
