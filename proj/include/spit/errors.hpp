#pragma once

#include <stdexcept>

namespace spit {

/// Mismatched frame or slot counts between paired arrays.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Out-of-range tuning parameter (window length, thresholds, steps).
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// More real tracks than output slots.
struct CapacityError : std::length_error {
    using std::length_error::length_error;
};

/// Quantity undefined for the given input (e.g. the angle of a zero vector).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Incompatible configurations or files (e.g. checkpoint and scenes disagree on M).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Training diverged to a non-finite loss.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace spit
