#pragma once

#include <stdexcept>
#include <string>

namespace pcx {

// Bad inputs: rejected configurations, malformed plans, out-of-domain arguments.
// Maps to CLI exit code 1.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& what) : std::invalid_argument(what) {}
};

// Failures of the numerics themselves (zero pivot, non-finite result).
// Maps to CLI exit code 2.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pcx
