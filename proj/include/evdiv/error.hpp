#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evdiv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input bytes. Carries the 1-based line (CSV) or 0 for binary input.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input that violates a data invariant (e.g. event outside the sensor).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A motion-model evaluation outside its admissible domain (1 + nu*tau <= 0 and the like).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid function argument.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Invalid simulator configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace evdiv
