#pragma once

#include <stdexcept>
#include <string>

namespace tvmort {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. line() is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Input is well-formed but inconsistent: non-monotone year blocks,
/// duplicate keys, incomplete grids.
class DataError : public Error {
public:
    using Error::Error;
};

/// Value outside its mathematical domain, e.g. a negative death rate.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Caller passed an out-of-range argument.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Too few kernel-weighted observations for the requested fit.
class DegenerateWindowError : public Error {
public:
    using Error::Error;
};

/// A normal-equation matrix was singular.
class RankError : public Error {
public:
    using Error::Error;
};

/// Likelihood optimisation or model selection failed.
class EstimationError : public Error {
public:
    using Error::Error;
};

}  // namespace tvmort
