#pragma once

#include <stdexcept>
#include <string>

namespace gridfreq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed case or scenario document.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Well-formed input that violates a model invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    using Error::Error;
};

class SingularJacobian : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of a cost function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Requested total input cannot be met within the controller bounds.
class Infeasible : public Error {
public:
    using Error::Error;
};

/// Newton solve of the passive-node constraints failed during a simulation.
class AlgebraicDivergence : public Error {
public:
    AlgebraicDivergence(double time, const std::string& what)
        : Error("algebraic solve diverged at t=" + std::to_string(time) + " s: " + what),
          time_(time) {}

    [[nodiscard]] double time() const noexcept { return time_; }

private:
    double time_;
};

}  // namespace gridfreq
