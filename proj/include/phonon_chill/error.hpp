#pragma once

#include <stdexcept>
#include <string>

namespace phonon_chill {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid physical input (non-Hermitian operator, negative rate, bad grid).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A numerical solve failed: singular matrix, non-convergence, instability.
class SolverError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent scenario configuration.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line)
    {
    }

    int line() const noexcept { return line_; }

private:
    int line_;
};

} // namespace phonon_chill
