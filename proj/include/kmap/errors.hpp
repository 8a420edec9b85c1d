#pragma once

#include <stdexcept>
#include <string>

namespace kmap {

// Bad parameters, malformed input, out-of-range requests. CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem and stream failures. CLI exit code 3.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Structurally valid input that admits no meaningful result,
// e.g. a Lyapunov sum over an orbit whose derivative is zero everywhere.
// CLI exit code 4.
class DegenerateError : public std::runtime_error {
public:
    explicit DegenerateError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace kmap
