#pragma once

#include <stdexcept>
#include <string>

namespace ratdiff {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter that must be strictly positive was zero or negative.
class NonPositiveParameter : public Error {
public:
    explicit NonPositiveParameter(std::string parameter, double value)
        : Error("parameter '" + parameter + "' must be positive, got " +
                std::to_string(value)),
          parameter_(std::move(parameter)) {}

    [[nodiscard]] const std::string& parameter() const noexcept { return parameter_; }

private:
    std::string parameter_;
};

/// The recurrence order k was below 1.
class InvalidOrder : public Error {
public:
    explicit InvalidOrder(int k)
        : Error("order k must be >= 1, got " + std::to_string(k)) {}
};

/// Requested the positive equilibrium of an equation that has none (c <= 1).
class NoPositiveEquilibrium : public Error {
public:
    using Error::Error;
};

/// The Riccati denominator 1 + t vanished within tolerance.
class RiccatiBlowup : public Error {
public:
    using Error::Error;
};

/// A window hit the forbidden set while an operation required a defined step.
class ForbiddenBlowup : public Error {
public:
    using Error::Error;
};

/// semistability analysis was requested at a point that is not fixed.
class NotAFixedPoint : public Error {
public:
    using Error::Error;
};

/// An operation's stated precondition does not hold for the given inputs.
class PreconditionViolated : public Error {
public:
    using Error::Error;
};

/// A trajectory is too short for the requested analysis.
class InsufficientData : public Error {
public:
    using Error::Error;
};

/// An iterative numeric routine failed to meet its residual bound.
class ConvergenceFailure : public Error {
public:
    using Error::Error;
};

}  // namespace ratdiff
