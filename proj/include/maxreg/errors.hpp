#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace maxreg {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rejected input: bad grid, non-finite samples, parameters out of range.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Iterative solve did not reach the requested tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual, std::size_t iterations)
        : Error(what), residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    std::size_t iterations() const noexcept { return iterations_; }

private:
    double residual_;
    std::size_t iterations_;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace maxreg
