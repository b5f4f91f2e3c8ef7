#pragma once

#include <stdexcept>
#include <string>

namespace facadewin {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when structured input (XML, JSON, RLE) cannot be decoded.
/// Carries the 1-based line/column of the failure when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, long line = 0, long column = 0)
        : Error(what), line_(line), column_(column) {}

    long line() const { return line_; }
    long column() const { return column_; }

private:
    long line_;
    long column_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class CodecError : public Error {
public:
    using Error::Error;
};

}  // namespace facadewin
