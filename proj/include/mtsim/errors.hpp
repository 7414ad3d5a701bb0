#pragma once

#include <stdexcept>
#include <string>

namespace mtsim {

// Thrown when an iterative routine fails to reach its target accuracy.
// The message names the achieved residual so callers can report it.
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when requested parameters leave the regime the numerics are built
// for (trivial chain phase, oversized Hilbert space, malformed states).
struct PhysicsGuard : std::runtime_error {
    explicit PhysicsGuard(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on a malformed or inconsistent run configuration; the message names
// the offending file, line, or key.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mtsim
