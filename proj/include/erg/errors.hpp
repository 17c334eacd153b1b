#pragma once

#include <stdexcept>
#include <string>

namespace erg {

/// Unknown scenario name or an override file that failed validation.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

/// The initial command violates the Lyapunov bound V(x0, x_g(g0)) <= Gamma_I(g0).
class InitializationError : public std::runtime_error {
 public:
  explicit InitializationError(const std::string& what) : std::runtime_error(what) {}
};

/// Integration produced a non-finite or unbounded state.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace erg
