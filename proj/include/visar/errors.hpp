#pragma once

#include <stdexcept>
#include <string>

namespace visar {

/// Bad or inconsistent input: unparseable files, invalid geometry,
/// misaligned grids, unknown ids, schema mismatches. CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: rank-deficient design, too few observations. CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace visar
