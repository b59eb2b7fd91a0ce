#pragma once

#include <stdexcept>
#include <string>

namespace clonekit {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on arguments (arity, range, domain agreement) was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A configured cap (candidate budget, fragment size, table size) was exceeded.
class ResourceExceeded : public Error {
public:
    using Error::Error;
};

/// Malformed text input. Line and column are 1-based.
class ParseError : public Error {
public:
    ParseError(int line, int column, const std::string& message)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
          line_(line),
          column_(column)
    {
    }

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

} // namespace clonekit
