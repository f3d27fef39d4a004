#pragma once

#include <stdexcept>
#include <string>

namespace srsim {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Matrix expected to be Hermitian PSD is not (within tolerance).
struct NonPsdError : Error {
  explicit NonPsdError(const std::string& what) : Error(what) {}
};

// Iterative routine hit its iteration cap before reaching tolerance.
struct NoConvergenceError : Error {
  explicit NoConvergenceError(const std::string& what) : Error(what) {}
};

struct NonPositiveDistanceError : Error {
  explicit NonPositiveDistanceError(const std::string& what) : Error(what) {}
};

// Operation only defined for a specific antenna configuration.
struct WrongModeError : Error {
  explicit WrongModeError(const std::string& what) : Error(what) {}
};

// Constraint threshold unreachable for the given channels.
struct InfeasibleError : Error {
  explicit InfeasibleError(const std::string& what) : Error(what) {}
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& what) : Error(what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace srsim
