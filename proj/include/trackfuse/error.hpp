#pragma once

#include <stdexcept>
#include <string>

namespace trackfuse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// A matrix that must be symmetric positive definite is not.
class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Importance weights vanished everywhere: the two densities do not overlap
/// at the resolution of the drawn samples.
class DegenerateOverlap : public Error {
public:
    using Error::Error;
};

class SingularGeometry : public Error {
public:
    using Error::Error;
};

class UnsupportedDimension : public Error {
public:
    using Error::Error;
};

/// Monte-Carlo harness exceeded its tolerated per-run failure rate.
class ScenarioAborted : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace trackfuse
