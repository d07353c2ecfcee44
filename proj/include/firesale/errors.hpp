#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace firesale {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range inputs (bad parameters, invalid networks, bad files).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A caller violated an operation's precondition (e.g. h <= 0 for a liquidation root).
class PreconditionError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// Argument outside the domain [0, M] of an inverse demand function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// An iterative method hit its iteration cap.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, std::size_t iterations, double residual)
        : Error(what + " (iterations=" + std::to_string(iterations) +
                ", residual=" + std::to_string(residual) + ")"),
          iterations_(iterations),
          residual_(residual) {}

    std::size_t iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    std::size_t iterations_;
    double residual_;
};

}  // namespace firesale
