#pragma once

#include <stdexcept>
#include <string>

namespace ttsense {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Multi-index or variable out of range.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Mode sizes / ranks of two operands do not conform.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// An operation would exceed a configured size cap.
class ResourceError : public Error {
public:
    using Error::Error;
};

/// Invalid parameter (distribution parameters, thresholds, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// The child process of a subprocess evaluator misbehaved.
class TransportError : public Error {
public:
    using Error::Error;
};

class TimeoutError : public TransportError {
public:
    using TransportError::TransportError;
};

/// The model produced a non-finite value.
class DataError : public Error {
public:
    using Error::Error;
};

/// Model with zero output variance; Sobol indices are undefined.
class DegenerateModelError : public Error {
public:
    using Error::Error;
};

/// A compressed approximation could not meet its tolerance.
class ApproximationError : public Error {
public:
    using Error::Error;
};

/// Internal consistency check failed (e.g. Sobol tensor not zero at the empty tuple).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace ttsense
