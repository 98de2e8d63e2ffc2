#pragma once
// Error taxonomy shared across the library. The CLI maps each category to a
// distinct process exit code.

#include <stdexcept>
#include <string>

namespace crossview {

// Bad inputs: dimension mismatches, malformed files, invalid configs.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values where finiteness was promised, training divergence.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem failures.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int validation = 2;
inline constexpr int numeric = 3;
inline constexpr int io = 4;
}  // namespace exit_code

}  // namespace crossview
