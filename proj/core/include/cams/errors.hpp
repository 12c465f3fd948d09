#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cams {

/// Raised when an argument lies outside the mathematical domain of an operation
/// (non-positive standard error, prevalence outside [0,1], ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when a caller violates an interface contract: empty dataset,
/// mismatched dimensions, unknown parameter name.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed external input (CSV rows, config files).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Warnings = std::vector<std::string>;

} // namespace cams
