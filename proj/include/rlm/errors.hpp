#pragma once

#include <stdexcept>
#include <string>

namespace rlm {

/// Invalid problem or run configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Mesh construction or mesh/operator mismatch.
class MeshError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Wavenumber on (or too close to) a threshold n*pi.
class ThresholdError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Pivot below the singularity threshold during LU factorisation.
class SingularMatrixError : public NumericalError {
public:
    SingularMatrixError(const std::string& what, long column)
        : NumericalError(what), column_(column) {}

    [[nodiscard]] long column() const { return column_; }

private:
    long column_;
};

}  // namespace rlm
