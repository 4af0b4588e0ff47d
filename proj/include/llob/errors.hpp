#pragma once

#include <stdexcept>
#include <string>

namespace llob {

/// Invalid configuration, parameters or input schema (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical solver failure, e.g. the price left the grid (CLI exit code 3).
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Statistical failure: insufficient data, unidentified fit (CLI exit code 4).
class StatError : public std::runtime_error {
public:
    explicit StatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace llob
