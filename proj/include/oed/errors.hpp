#pragma once

#include <stdexcept>
#include <string>

namespace oed {

/// Root of the library's exception hierarchy. `exit_code()` is the process
/// status the CLI reports for this class of failure.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

/// Invalid configuration or input data (bad bounds, unknown keys, misaligned grids).
class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class GridMismatch : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Numerical failure: integration blow-up, non-convergence, exhausted retries.
class NumericError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

class NonFiniteState : public NumericError {
public:
    using NumericError::NumericError;
};

class DidNotConverge : public NumericError {
public:
    using NumericError::NumericError;
};

class TooManyFailures : public NumericError {
public:
    using NumericError::NumericError;
};

class AllStartsFailed : public NumericError {
public:
    using NumericError::NumericError;
};

class IoError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

}  // namespace oed
