#pragma once

#include <stdexcept>
#include <string>

namespace gtab {

/// Invalid user-supplied configuration (violated invariant on input).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A table or file lacks a piece the caller needs (missing slice, bad shape).
class StructureError : public std::runtime_error {
public:
    explicit StructureError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical breakdown that valid input must never trigger.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace gtab
