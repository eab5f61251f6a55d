#ifndef FDIA_ERROR_HPP
#define FDIA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace fdia {

// Malformed input text (case files, configs). Carries a 1-based position
// when one is known; line == 0 means "no position".
class ParseError : public std::runtime_error {
public:
    ParseError(std::string msg, int line = 0, int column = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ":"
                                            + std::to_string(column) + ": " + msg
                                      : msg),
          line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// Structurally well-formed input that violates a domain invariant
// (dangling bus, zero reactance, disconnected graph, ...).
class SemanticError : public std::runtime_error {
public:
    explicit SemanticError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad experiment configuration; maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Mismatched vector/matrix dimensions between caller and model.
class DimensionError : public std::runtime_error {
public:
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace fdia

#endif
