#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace follmer {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Base of every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input shapes disagree (point vs. measure dimension, sample set sizes, ...).
class DimensionError : public Error {
public:
    using Error::Error;
};

// A precondition on a scalar argument failed (time outside [0,1], n < 2, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// A computation produced a non-finite value or degenerated numerically.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Configuration or input file could not be accepted.
class ConfigError : public Error {
public:
    using Error::Error;
};

inline void require_dim(Eigen::Index expected, Eigen::Index got, const char* what)
{
    if (expected != got) {
        throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                             ", got " + std::to_string(got));
    }
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

std::string format_point(const Vector& x);

} // namespace follmer
