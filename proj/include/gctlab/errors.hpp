#ifndef GCTLAB_ERRORS_HPP
#define GCTLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gctlab {

/// Game or certificate computation would exceed the configured cell budget.
struct BudgetExceeded : std::runtime_error {
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

/// No cylinder with positive measure below the required bound exists within
/// the depth cap (degenerate theory for the padding-cylinder walk).
struct NoPositiveCylinder : std::runtime_error {
  explicit NoPositiveCylinder(const std::string& what) : std::runtime_error(what) {}
};

/// No enumerated dense path within the index cap extends the current history.
struct DensityExhausted : std::runtime_error {
  explicit DensityExhausted(const std::string& what) : std::runtime_error(what) {}
};

/// Configuration text failed to parse.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gctlab

#endif  // GCTLAB_ERRORS_HPP
