#pragma once

#include <stdexcept>
#include <string>

namespace dodewalk {

/// Invalid or inconsistent run configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A time step that makes some transition probability negative (CLI exit code 3).
class StabilityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Requested staying probability cannot be reached by any positive time step.
class InfeasibleError : public StabilityError {
public:
    using StabilityError::StabilityError;
};

/// Density solver lost more mass through the box boundary than allowed.
class BoundaryLossError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dodewalk
