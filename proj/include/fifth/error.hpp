#pragma once

#include <stdexcept>
#include <string>

namespace fifth {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Misuse of the network or frame structure (unknown ids, invalid state
/// transitions). Contradictions are values, never errors.
class StructuralError : public Error {
public:
    using Error::Error;
};

enum class ParseErrorKind { Syntax, UnknownForm, ArityMismatch, UnboundName };

class ParseError : public Error {
public:
    ParseError(ParseErrorKind kind, int line, int column, const std::string& message)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          kind_(kind),
          line_(line),
          column_(column)
    {
    }

    ParseErrorKind kind() const { return kind_; }
    int line() const { return line_; }
    int column() const { return column_; }

private:
    ParseErrorKind kind_;
    int line_;
    int column_;
};

/// Non-finite loss during training, or an inconsistent checkpoint.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace fifth
