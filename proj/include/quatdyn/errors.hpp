#pragma once

#include <stdexcept>
#include <string>

namespace quatdyn {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad argument values (zero divisor, vanishing denominator, ...).
struct DomainError : Error {
    using Error::Error;
};

// Operation asked of a FieldSpec family it does not apply to.
struct WrongFamilyError : Error {
    using Error::Error;
};

// Operation asked outside the parameter regime it is defined for.
struct WrongRegimeError : Error {
    using Error::Error;
};

// Evaluation too close to the singular locus of an integral (denominator ~ 0).
struct SingularLocusError : DomainError {
    using DomainError::DomainError;
};

// (h, f) level pair outside the admissible torus domain.
struct DomainViolationError : Error {
    using Error::Error;
};

// Root scan found no sign change.
struct NoBracketError : Error {
    using Error::Error;
};

// Adaptive quadrature could not reach the requested error estimate.
struct QuadratureFailureError : Error {
    using Error::Error;
};

// Malformed configs / JSON / CLI input.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace quatdyn
