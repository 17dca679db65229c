#ifndef LIESTAB_ERRORS_HPP
#define LIESTAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace liestab {

/// Base class for all liestab errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent input (dimensions, finiteness, field values).
struct InputError : Error {
  explicit InputError(const std::string& what) : Error("input error: " + what) {}
};

// --- algebra ---

/// The subspace computed as the radical failed the solvability test.
struct SolvabilityCheckFailed : Error {
  explicit SolvabilityCheckFailed(const std::string& what)
      : Error("solvability check failed: " + what) {}
};

/// The Levi lifting system is numerically rank-deficient.
struct LiftingSingular : Error {
  explicit LiftingSingular(const std::string& what)
      : Error("levi lifting singular: " + what) {}
};

/// A least-squares projection left a residual above tolerance.
struct ResidualTooLarge : Error {
  explicit ResidualTooLarge(const std::string& what)
      : Error("residual too large: " + what) {}
};

// --- integration ---

/// The local error proxy of the integrator exceeded its budget.
struct StepTooCoarse : Error {
  explicit StepTooCoarse(const std::string& what)
      : Error("step too coarse: " + what) {}
};

/// A propagator lost invertibility in floating point.
struct IllConditioned : Error {
  explicit IllConditioned(const std::string& what)
      : Error("ill conditioned: " + what) {}
};

/// Two traces do not share the same time grid.
struct GridMismatch : Error {
  explicit GridMismatch(const std::string& what)
      : Error("grid mismatch: " + what) {}
};

/// A requested time is not a sample of the trace grid.
struct OffGrid : Error {
  explicit OffGrid(const std::string& what) : Error("off grid: " + what) {}
};

// --- entropy / fitting ---

/// Every spanning count saturated the test grid; the grid is too coarse.
struct InsufficientGrowthData : Error {
  explicit InsufficientGrowthData(const std::string& what)
      : Error("insufficient growth data: " + what) {}
};

/// The trajectory envelope vanishes identically.
struct DegenerateEnvelope : Error {
  explicit DegenerateEnvelope(const std::string& what)
      : Error("degenerate envelope: " + what) {}
};

/// The eigenvalue solver did not converge.
struct EigenFailure : Error {
  explicit EigenFailure(const std::string& what)
      : Error("eigen solver failure: " + what) {}
};

} // namespace liestab

#endif
