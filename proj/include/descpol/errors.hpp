#pragma once

#include <stdexcept>
#include <string>

namespace descpol {

// Value outside the domain of a partition, environment or update rule.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Mismatched widths, lengths or network architectures.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A descriptive action whose condition holds no item in the current state.
struct InfeasibleActionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal contract broken (e.g. empty feasible set for a translated state).
struct InvariantViolation : std::logic_error {
    using std::logic_error::logic_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed tabular model or item statistics that violate a precondition.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Configuration problem. `path` names the offending field, e.g. "phases[1].steps".
struct ConfigError : std::runtime_error {
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)), message_(message) {}

    const std::string& path() const noexcept { return path_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string path_;
    std::string message_;
};

}  // namespace descpol
