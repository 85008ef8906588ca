#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nlsh {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    /// Short machine-readable tag, e.g. "grid_mismatch".
    virtual const char* kind() const noexcept { return "error"; }
};

class InvalidArgument : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "invalid_argument"; }
};

class GridMismatch : public Error {
public:
    GridMismatch() : Error("fields live on different grids") {}
    const char* kind() const noexcept override { return "grid_mismatch"; }
};

class UnknownMethod : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "unknown_method"; }
};

class InvalidTableau : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "invalid_tableau"; }
};

class SingularBlock : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "singular_block"; }
};

/// Raised when a stage or step produces NaN/Inf, which signals instability.
class NonFiniteState : public Error {
public:
    NonFiniteState(std::size_t stage, std::size_t step, double time)
        : Error("non-finite state at stage " + std::to_string(stage) + " of step " +
                std::to_string(step) + " (t=" + std::to_string(time) + ")"),
          stage_(stage), step_(step), time_(time) {}

    const char* kind() const noexcept override { return "non_finite_state"; }
    std::size_t stage() const noexcept { return stage_; }
    std::size_t step() const noexcept { return step_; }
    double time() const noexcept { return time_; }

private:
    std::size_t stage_;
    std::size_t step_;
    double time_;
};

class ConfigError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "config_error"; }
};

} // namespace nlsh
