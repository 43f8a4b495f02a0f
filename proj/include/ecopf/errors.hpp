#pragma once

#include <stdexcept>
#include <string>

namespace ecopf {

/// Bad or inconsistent run configuration (missing files, invalid options).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or insufficient input data (series, calendars, hierarchies).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure (degenerate normalizer, solver breakdown).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ecopf
