#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace pfl {

/// Raised for malformed user input: configs, CLI arguments, data files.
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a computation cannot proceed (dimension mismatch, non-finite
/// loss, closure violation, ...).
class ComputeError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t r;
    if (__builtin_add_overflow(a, b, &r))
        throw ComputeError("integer overflow in format arithmetic");
    return r;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t r;
    if (__builtin_mul_overflow(a, b, &r))
        throw ComputeError("integer overflow in format arithmetic");
    return r;
}

} // namespace detail
} // namespace pfl
