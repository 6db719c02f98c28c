#pragma once

#include <stdexcept>
#include <string>

namespace polisim {

// Raised for malformed inputs: scenario files, norm documents, infeasible
// specs. The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a caller breaks an operation's precondition (e.g. an agent
// choosing an action outside its available set). The CLI maps this to exit
// code 2.
class ContractViolation : public std::logic_error {
public:
    explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

// Syntax error in the norm DSL, with source position.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& msg, int line, int column)
        : ValidationError(msg + " at line " + std::to_string(line) + ", column " +
                          std::to_string(column)),
          line_(line),
          column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace polisim
