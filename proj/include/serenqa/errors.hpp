#pragma once

#include <stdexcept>
#include <string>

namespace serenqa {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input that could not be read at all (bad syntax, bad header).
struct ParseError : Error {
    using Error::Error;
};

// Well-formed input that violates a documented constraint.
struct ValidationError : Error {
    using Error::Error;
};

// A referenced id, file, or key does not exist.
struct NotFoundError : Error {
    using Error::Error;
};

// An argument is outside the function's domain.
struct DomainError : Error {
    using Error::Error;
};

// A string value does not follow its expected layout.
struct FormatError : Error {
    using Error::Error;
};

// Iteration failed to reach the requested tolerance.
struct ConvergenceError : Error {
    using Error::Error;
};

// A probability distribution cannot be formed (zero total mass, zero
// denominator under a positive numerator).
struct DegenerateDistributionError : Error {
    using Error::Error;
};

// A query shape the executor does not accept.
struct UnsupportedPatternError : Error {
    using Error::Error;
};

// Graph surgery cannot reach the requested outcome.
struct InfeasibleSplitError : Error {
    using Error::Error;
};

// Exhaustive search would exceed the configured bound.
struct RefusalError : Error {
    using Error::Error;
};

// Remote policy endpoint unreachable or persistently malformed.
struct PolicyTransportError : Error {
    using Error::Error;
};

// On-disk cache does not match the current inputs (strict mode only).
struct StaleCacheError : Error {
    using Error::Error;
};

// Correlation of a constant sequence.
struct UndefinedCorrelationError : Error {
    using Error::Error;
};

}  // namespace serenqa
