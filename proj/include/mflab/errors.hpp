#pragma once

#include <stdexcept>
#include <string>

namespace mflab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument violates a documented precondition or type invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure could not produce a trustworthy answer.
class NumericalError : public Error {
public:
    using Error::Error;
};

class NonZeroMeanError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class MassMismatchError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class UnderresolvedError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class AtomPlacementError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NonConvergedError : public NumericalError {
public:
    NonConvergedError(const std::string& what, double estimate)
        : NumericalError(what), estimate_(estimate) {}
    double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

}  // namespace mflab
