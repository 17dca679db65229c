#ifndef LIESTAB_SWITCHED_SYSTEM_HPP
#define LIESTAB_SWITCHED_SYSTEM_HPP

#include <liestab/errors.hpp>
#include <liestab/lie_algebra.hpp>
#include <liestab/types.hpp>

#include <cstdint>
#include <vector>

namespace liestab {

/// Piecewise-constant switching signal on [0, horizon].
/// Interval i is [breakpoints[i], breakpoints[i+1]) with 1-based mode index
/// mode_indices[i]; the last interval extends to the horizon.
struct SwitchingSignal {
  std::vector<double> breakpoints;  ///< strictly increasing, starts at 0
  std::vector<int> mode_indices;    ///< one per interval, values in 1..N
  double horizon = 0.0;

  SwitchingSignal() = default;
  SwitchingSignal(std::vector<double> bps, std::vector<int> modes, double T);

  int mode_at(double t) const;
  std::size_t interval_count() const { return breakpoints.size(); }
};

/// Exponentially distributed dwell times with mean 1/switch_rate and uniform
/// mode choice; a single interval when switch_rate is zero.  Deterministic
/// for a fixed seed.
SwitchingSignal random_signal(std::uint64_t seed, double switch_rate, double T, int N);

/// Time-sampled evolution operators.  The sample grid is the uniform step
/// grid merged with every switching breakpoint.  Each channel carries a
/// per-sample log scale factor; the represented matrix is
/// stored_matrix * exp(scale_log).  Scale factors stay zero unless an entry
/// magnitude crosses the overflow threshold during integration.
struct PropagatorTrace {
  std::vector<double> times;
  std::vector<Matrix> phi;    ///< full evolution operator (evolve_full)
  std::vector<Matrix> phi_h;  ///< semi-simple factor (evolve_factored)
  std::vector<Matrix> phi_m;  ///< radical factor (evolve_factored)
  std::vector<double> logdet_h;  ///< running log|det| of the integrated flow
  std::vector<double> scale_log_phi;
  std::vector<double> scale_log_h;
  std::vector<double> scale_log_m;
  double step = 0.0;

  bool has_full() const { return !phi.empty(); }
  bool has_factored() const { return !phi_h.empty(); }

  /// Index of a grid time; throws OffGrid if t is not a sample.
  std::size_t index_of(double t) const;
};

struct EvolveOptions {
  double ode_tol = 1e-6;    ///< local error proxy budget, operator norm
  bool check_halving = true;
  bool check_exact = true;  ///< matrix-exponential channel, used when n <= 8
  double cond_limit = 1e12;
  double overflow_threshold = 1e150;
};

/// Integrates the full operator with the classical 4th-order one-step method,
/// restarting exactly at switching breakpoints.  Per-gap transitions are
/// compared against a step-halving channel and (for n <= 8) the interval
/// matrix exponential; disagreement beyond ode_tol raises StepTooCoarse.
PropagatorTrace evolve_full(const GeneratorSet& gens, const SwitchingSignal& sig,
                            double step, const EvolveOptions& opts = {});

/// Co-integrates the semi-simple factor and the radical factor, where the
/// radical equation is driven by the conjugated coefficient obtained from a
/// linear solve at every stage (no inverse is integrated).  The running
/// log-determinant accumulates trace(A_h) * dt exactly per gap.  Raises
/// IllConditioned when the semi-simple factor's condition estimate exceeds
/// cond_limit.
PropagatorTrace evolve_factored(const LeviDecomposition& decomp, const SwitchingSignal& sig,
                                double step, const EvolveOptions& opts = {});

/// Max over samples of |Phi - Phi_h * Phi_m| in operator norm.
/// Throws GridMismatch unless both traces share the same grid.
double factorization_residual(const PropagatorTrace& full, const PropagatorTrace& factored);

struct StateTrajectory {
  std::vector<double> times;
  std::vector<Vector> states;
};

/// x(t) = Phi(t) x0 on the evolve_full grid.
StateTrajectory state_trajectory(const GeneratorSet& gens, const SwitchingSignal& sig,
                                 const Vector& x0, double step,
                                 const EvolveOptions& opts = {});

} // namespace liestab

#endif
