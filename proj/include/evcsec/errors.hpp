#pragma once

#include <stdexcept>
#include <string>

namespace evcsec {

// Domain errors map to CLI exit code 1, I/O errors to exit code 2.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parse failure with source position (1-based).
class ParseError : public DomainError {
public:
    ParseError(const std::string& msg, int line, int col)
        : DomainError(msg + " at line " + std::to_string(line) + ", col " +
                      std::to_string(col)),
          line_(line),
          col_(col) {}

    int line() const { return line_; }
    int col() const { return col_; }

private:
    int line_;
    int col_;
};

} // namespace evcsec
