#pragma once

#include <stdexcept>
#include <string>

namespace quasilog {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (negative t, y ∉ (0,1), ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A documented precondition on the parameters does not hold (e.g. λ ≤ λ_{b,0} for the subsolution).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Geometry or weight configuration violates the hypotheses of the problem.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// Floating point breakdown: failed factorization, non-finite values, sign violations.
class NumericError : public Error {
public:
    using Error::Error;
};

/// An iteration ran out of budget. Carries the last residual it saw.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : Error(what + " (last residual " + std::to_string(last_residual) + ")"),
          last_residual_(last_residual) {}

    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

/// Malformed experiment configuration. Carries the offending line (0 for flags) and key.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line, std::string key)
        : Error(what), line_(line), key_(std::move(key)) {}

    int line() const noexcept { return line_; }
    const std::string& key() const noexcept { return key_; }

private:
    int line_;
    std::string key_;
};

}  // namespace quasilog
