#pragma once
#include <stdexcept>
#include <string>

namespace scatterlab {

/// Invalid configuration input (unknown keys, malformed files, missing fields).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A physics precondition was violated (bad parameters, out-of-range indices).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed (singular system, step budget exhausted, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition)
        throw PreconditionError(message);
}

} // namespace detail
} // namespace scatterlab
