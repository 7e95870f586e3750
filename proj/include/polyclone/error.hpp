#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace polyclone {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed textual input. Carries a 1-based line/column when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
        : Error(line == 0 ? what
                          : what + " (line " + std::to_string(line) + ", column " +
                                std::to_string(column) + ")"),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Structurally invalid value: wrong arity, element out of range, duplicate tuple...
class ValidationError : public Error {
public:
    using Error::Error;
};

class SignatureMismatch : public Error {
public:
    using Error::Error;
};

/// A configured size cap would be exceeded.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Two independent decision routes disagreed. Indicates a bug, never a user error.
class CrossCheckError : public Error {
public:
    using Error::Error;
};

} // namespace polyclone
