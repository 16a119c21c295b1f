#pragma once

#include <stdexcept>
#include <string>

namespace wsnc {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An iterative numeric routine failed to reach its tolerance.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested configuration cannot be satisfied.
///
/// `Stability` means no s > 0 satisfies the per-link stability condition;
/// `Target` means the path is stable but the QoS target is not met even at
/// the largest admissible resources.
class InfeasibleError : public std::runtime_error {
public:
    enum class Reason { Stability, Target };

    InfeasibleError(Reason reason, const std::string& what)
        : std::runtime_error(what), reason_(reason) {}

    Reason reason() const noexcept { return reason_; }

private:
    Reason reason_;
};

/// Malformed scenario text; carries the 1-based source position.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line, int column)
        : std::runtime_error(what), line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace wsnc
